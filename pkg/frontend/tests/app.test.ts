import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { apiBaseUrl, createApp, loadGraphData, type App } from "../src/app.js";
import { fixtureServer, flush, recorded } from "./fixtures.js";

let root: HTMLElement;
let app: App;

beforeEach(() => {
  document.body.innerHTML = "";
  delete (window as { __VESSELKG_API__?: string }).__VESSELKG_API__;
  root = document.createElement("div");
  root.id = "app";
  document.body.append(root);
  const server = fixtureServer();
  app = createApp(root, new ApiClient("", server.fetchFn));
});

describe("apiBaseUrl", () => {
  it("prefers the window override, then the meta tag, then same-origin", () => {
    expect(apiBaseUrl()).toBe("");
    const meta = document.createElement("meta");
    meta.name = "vesselkg-api";
    meta.content = "http://meta.example";
    document.head.append(meta);
    expect(apiBaseUrl()).toBe("http://meta.example");
    (window as { __VESSELKG_API__?: string }).__VESSELKG_API__ = "http://override.example";
    expect(apiBaseUrl()).toBe("http://override.example");
    meta.remove();
  });
});

describe("createApp", () => {
  it("starts on the map tab and switches panes", () => {
    expect(root.querySelector(".pane-map")?.classList.contains("hidden")).toBe(false);
    expect(root.querySelector(".pane-graph")?.classList.contains("hidden")).toBe(true);
    app.showTab("graph");
    expect(root.querySelector(".pane-map")?.classList.contains("hidden")).toBe(true);
    expect(root.querySelector(".pane-graph")?.classList.contains("hidden")).toBe(false);
  });

  it("lists vessels and loads their tracks on click", async () => {
    await app.loadVessels();
    const buttons = root.querySelectorAll<HTMLButtonElement>(".vessel-list button");
    expect(buttons.length).toBe(3);

    buttons[0]!.click();
    await flush();
    expect(root.querySelectorAll(".map-host path.track").length).toBeGreaterThan(0);
  });

  it("assembles the full graph from node and neighbor endpoints", async () => {
    const server = fixtureServer();
    const { nodes, edges } = await loadGraphData(new ApiClient("", server.fetchFn));
    expect(nodes.length).toBeGreaterThan(0);
    expect(edges.length).toBeGreaterThan(0);
    const ids = new Set(nodes.map((n) => n.id));
    for (const edge of edges) {
      expect(ids.has(edge.a)).toBe(true);
      expect(ids.has(edge.b)).toBe(true);
      expect(edge.a <= edge.b).toBe(true);
    }

    await app.loadGraph();
    expect(root.querySelectorAll(".graph-host .graph-node").length).toBe(nodes.length);
  });

  it("clicking an imputed track renders evidence byte-identical to the raw response", async () => {
    await app.loadVessels();
    root.querySelector<HTMLButtonElement>('[data-mmsi="219000001"]')!.click();
    await flush();
    const path = root.querySelector<SVGPathElement>(
      `path[data-segment-id="${recorded.imputed_segment_id}"]`,
    )!;
    path.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();
    expect(root.querySelector(".report-panel h2")?.textContent).toBe(
      `Segment ${recorded.imputed_segment_id}`,
    );

    const raw = recorded.routes[
      `GET /v1/segments/${recorded.imputed_segment_id}/report`
    ] as { explanation: string };
    const lines = raw.explanation.split("\n");
    const expected = lines
      .slice(lines.indexOf("EVIDENCE:") + 1)
      .map((line) => (line.startsWith("- ") ? line.slice(2) : line));
    const rendered = [...root.querySelectorAll(".evidence-line")].map((el) => el.textContent);
    expect(rendered).toEqual(expected);
  });
});
