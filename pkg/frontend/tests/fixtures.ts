/** Replay recorded service responses as a FetchLike.
 *
 * recorded.json is captured from a live instance by
 * scripts/record_ui_fixtures.py (repo root). Keys are "GET <path>"
 * with paths percent-encoded the way the recorder requested them;
 * lookups decode both sides so any equivalent client encoding matches.
 */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import type { FetchLike } from "../src/api.js";

export interface RecordedFixtures {
  imputed_segment_id: string;
  port_entry_node_id: string;
  job_config: { source: Record<string, unknown> } & Record<string, unknown>;
  job_sequence: Array<{ job_id: string; phase: string } & Record<string, unknown>>;
  routes: Record<string, unknown>;
}

export const recorded: RecordedFixtures = JSON.parse(
  readFileSync(resolve(process.cwd(), "tests/fixtures/recorded.json"), "utf-8"),
) as RecordedFixtures;

export interface FixtureServer {
  fetchFn: FetchLike;
  /** canonical "METHOD path" of every request seen, in order */
  requests: string[];
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function fixtureServer(): FixtureServer {
  const routes = new Map<string, unknown>();
  for (const [key, doc] of Object.entries(recorded.routes)) {
    routes.set(decodeURIComponent(key), doc);
  }
  const jobId = recorded.job_sequence[0]!.job_id;
  let jobCursor = 0;
  const requests: string[] = [];

  const fetchFn: FetchLike = (url, init) => {
    const method = init?.method ?? "GET";
    const key = `${method} ${decodeURIComponent(url)}`;
    requests.push(key);

    if (method === "POST" && decodeURIComponent(url) === "/v1/jobs") {
      return Promise.resolve(
        jsonResponse(202, { schema_version: "1", kind: "job_submitted", job_id: jobId }),
      );
    }
    if (key === `GET /v1/jobs/${jobId}`) {
      const index = Math.min(jobCursor, recorded.job_sequence.length - 1);
      jobCursor += 1;
      return Promise.resolve(jsonResponse(200, recorded.job_sequence[index]));
    }
    const doc = routes.get(key);
    if (doc === undefined) {
      return Promise.resolve(
        jsonResponse(404, { schema_version: "1", kind: "error", detail: `no fixture for ${key}` }),
      );
    }
    return Promise.resolve(jsonResponse(200, doc));
  };

  return { fetchFn, requests };
}

/** Drain queued microtasks/timers so fire-and-forget handlers settle. */
export async function flush(times = 3): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
