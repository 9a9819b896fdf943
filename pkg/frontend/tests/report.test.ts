import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { ReportPanel } from "../src/report.js";
import { segmentReportSchema } from "../src/types.js";
import { fixtureServer, flush, recorded } from "./fixtures.js";

let container: HTMLElement;
let panel: ReportPanel;

beforeEach(() => {
  document.body.innerHTML = "";
  container = document.createElement("div");
  document.body.append(container);
  const server = fixtureServer();
  panel = new ReportPanel(container, new ApiClient("", server.fetchFn));
});

function rawReport() {
  return segmentReportSchema.parse(
    recorded.routes[`GET /v1/segments/${recorded.imputed_segment_id}/report`],
  );
}

function rawEvidenceLines(): string[] {
  const lines = rawReport().explanation.split("\n");
  const start = lines.indexOf("EVIDENCE:");
  return lines.slice(start + 1).map((line) => (line.startsWith("- ") ? line.slice(2) : line));
}

describe("ReportPanel", () => {
  it("renders evidence items byte-identical to the raw response text", async () => {
    await panel.showSegment(recorded.imputed_segment_id);
    const rendered = [...container.querySelectorAll(".evidence-line")].map(
      (el) => el.textContent,
    );
    expect(rendered).toEqual(rawEvidenceLines());
    expect(rendered.length).toBe(rawReport().evidence.length);
  });

  it("shows header, cues, rationale, and one chip per report field", async () => {
    await panel.showSegment(recorded.imputed_segment_id);
    expect(container.querySelector("h2")?.textContent).toBe(
      `Segment ${recorded.imputed_segment_id}`,
    );
    expect(container.querySelector(".badge")?.textContent).toBe("imputed");

    const report = rawReport();
    const cueCount = report.explanation
      .split("\n")
      .filter((line) => line.startsWith("- ")).length;
    expect(container.querySelectorAll(".cue-line").length).toBe(
      cueCount - report.evidence.length,
    );
    expect(container.querySelector(".rationale")?.textContent).toContain(
      "Transit: Steady Course",
    );

    // static attrs + current behavior + prev behavior + method; no next here
    const chips = [...container.querySelectorAll(".field-chip")];
    expect(chips.length).toBe(
      report.static_attributes.length +
        (report.behavior_context.prev ? 1 : 0) +
        (report.behavior_context.current ? 1 : 0) +
        (report.behavior_context.next ? 1 : 0) +
        (report.method ? 1 : 0),
    );
  });

  it("clicking a field chip highlights its node in the embedded subgraph", async () => {
    await panel.showSegment(recorded.imputed_segment_id);
    const chip = container.querySelector<HTMLButtonElement>(".field-chip")!;
    const nodeId = chip.getAttribute("data-node")!;
    chip.click();
    const marked = [...container.querySelectorAll(".sg-node.highlighted")];
    expect(marked.length).toBe(1);
    expect(marked[0]!.getAttribute("data-node-id")).toBe(nodeId);

    // highlighting another field moves the mark instead of stacking
    const chips = container.querySelectorAll<HTMLButtonElement>(".field-chip");
    chips[chips.length - 1]!.click();
    expect(container.querySelectorAll(".sg-node.highlighted").length).toBe(1);
  });

  it("opens a node report from the subgraph and navigates back", async () => {
    await panel.showSegment(recorded.imputed_segment_id);
    const report = rawReport();
    const target = report.navigation[0]!;
    const circle = container.querySelector<SVGCircleElement>(
      `.sg-node[data-node-id="${target}"] circle`,
    )!;
    circle.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();

    expect(panel.current?.kind).toBe("node");
    const back = container.querySelector<HTMLButtonElement>(".back-button")!;
    expect(back.disabled).toBe(false);
    expect(container.querySelectorAll(".neighbor-row").length).toBeGreaterThan(0);

    back.click();
    expect(panel.current?.kind).toBe("segment");
    expect(container.querySelector("h2")?.textContent).toBe(
      `Segment ${recorded.imputed_segment_id}`,
    );
  });

  it("shows neighbor weights and shares exactly as served", async () => {
    await panel.openNode(recorded.port_entry_node_id);
    const rows = [...container.querySelectorAll(".neighbor-row")];
    const doc = recorded.routes[
      `GET /v1/kg/nodes/${encodeURIComponent(recorded.port_entry_node_id)}`
    ] as { neighbors: Array<{ weight: number; total: number; share_percent: string }> };
    expect(rows.length).toBe(doc.neighbors.length);
    rows.forEach((row, i) => {
      const cells = row.querySelectorAll("td");
      expect(cells[2]!.textContent).toBe(`${doc.neighbors[i]!.weight} of ${doc.neighbors[i]!.total}`);
      expect(cells[3]!.textContent).toBe(`${doc.neighbors[i]!.share_percent}%`);
    });
  });

  it("navigates between node reports via neighbor links", async () => {
    await panel.openNode(recorded.port_entry_node_id);
    const link = container.querySelector<HTMLButtonElement>(".node-link")!;
    const linkedDisplay = link.textContent;
    link.click();
    await flush();
    expect(panel.current?.kind).toBe("node");
    expect(container.querySelector("h2")?.textContent).toBe(linkedDisplay);
    panel.back();
    expect(container.querySelector("h2")?.textContent).not.toBe(linkedDisplay);
  });
});
