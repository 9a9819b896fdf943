import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { JobForm, configFromForm } from "../src/jobs.js";
import { fixtureServer, flush, recorded } from "./fixtures.js";

let container: HTMLElement;
let form: JobForm;
let requests: string[];

function setField(name: string, value: string): void {
  const input = form.form.elements.namedItem(name) as HTMLInputElement;
  input.value = value;
}

function fillRequiredFields(): void {
  const source = recorded.job_config.source;
  setField("source.name", String(source["name"]));
  setField("source.url_template", String(source["url_template"]));
  setField("source.date_from", String(source["date_from"]));
  setField("source.date_to", String(source["date_to"]));
}

beforeEach(() => {
  document.body.innerHTML = "";
  container = document.createElement("div");
  document.body.append(container);
  const server = fixtureServer();
  requests = server.requests;
  form = new JobForm(container, new ApiClient("", server.fetchFn), { pollIntervalMs: 0 });
});

describe("configFromForm", () => {
  it("omits blank optional fields so server defaults apply", () => {
    fillRequiredFields();
    const config = configFromForm(form.form);
    expect(Object.keys(config).sort()).toEqual(["source"]);
    expect(config["source"]).toEqual({
      name: recorded.job_config.source["name"],
      url_template: recorded.job_config.source["url_template"],
      date_from: recorded.job_config.source["date_from"],
      date_to: recorded.job_config.source["date_to"],
    });
  });

  it("types numeric fields and keeps paths as strings", () => {
    fillRequiredFields();
    setField("gap_threshold_s", "900");
    setField("target_interval_s", "60");
    setField("v_max_kn", "42.5");
    setField("worker_count", "4");
    setField("rule_config", "rules.json");
    setField("port_directory", "ports.csv");
    setField("source.cache_dir", "warm-cache");
    setField("source.time_interval_from", "06:00:00");
    setField("source.time_interval_to", "09:00:00");

    const config = configFromForm(form.form);
    expect(config["gap_threshold_s"]).toBe(900);
    expect(config["target_interval_s"]).toBe(60);
    expect(config["v_max_kn"]).toBe(42.5);
    expect(config["worker_count"]).toBe(4);
    expect(config["rule_config"]).toBe("rules.json");
    expect(config["port_directory"]).toBe("ports.csv");
    const source = config["source"] as Record<string, unknown>;
    expect(source["cache_dir"]).toBe("warm-cache");
    expect(source["time_interval"]).toEqual(["06:00:00", "09:00:00"]);
  });

  it("drops a half-filled time window", () => {
    fillRequiredFields();
    setField("source.time_interval_from", "06:00:00");
    const source = configFromForm(form.form)["source"] as Record<string, unknown>;
    expect(source["time_interval"]).toBeUndefined();
  });
});

describe("JobForm polling", () => {
  it("walks the documented phases in order and stops on done", async () => {
    fillRequiredFields();
    const final = await form.submit();
    expect(final?.phase).toBe("done");

    const crumbs = [...container.querySelectorAll(".phase-breadcrumb .phase")].map(
      (el) => el.textContent,
    );
    expect(crumbs).toEqual(["downloading", "ingesting", "building_kg", "imputing", "done"]);

    // one POST plus one GET per recorded status, then silence
    expect(requests[0]).toBe("POST /v1/jobs");
    const polls = requests.filter((r) => r.startsWith("GET /v1/jobs/"));
    expect(polls.length).toBe(recorded.job_sequence.length);
    await flush(5);
    expect(requests.length).toBe(1 + recorded.job_sequence.length);
  });

  it("renders final counters exactly as served", async () => {
    fillRequiredFields();
    await form.submit();
    const doneDoc = recorded.job_sequence[recorded.job_sequence.length - 1]!;
    const counters = doneDoc["counters"] as Record<string, number>;
    for (const [key, value] of Object.entries(counters)) {
      const cell = container.querySelector(`[data-counter="${key}"]`);
      expect(cell?.textContent).toBe(String(value));
    }
    expect(Object.keys(counters)).toContain("records_parsed");
  });

  it("shows the submit error when the service refuses the job", async () => {
    fillRequiredFields();
    const refusing = new JobForm(
      container,
      new ApiClient("", () =>
        Promise.resolve(
          new Response(
            JSON.stringify({ schema_version: "1", kind: "error", detail: "another job is already running" }),
            { status: 409, headers: { "content-type": "application/json" } },
          ),
        ),
      ),
      { pollIntervalMs: 0 },
    );
    const outcome = await refusing.submit();
    expect(outcome).toBeNull();
    expect(container.querySelector(".job-error")?.textContent).toBe(
      "another job is already running",
    );
  });
});
