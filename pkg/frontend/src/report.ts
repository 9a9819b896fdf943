/** Analysis report panel with evidence navigation.
 *
 * Shows segment reports and node reports in one panel with a history
 * stack. Clicking a report field highlights its node in the embedded
 * subgraph; clicking a subgraph node or a neighbor row opens that
 * node's own report. All text and numbers come verbatim from the
 * service documents.
 */

import * as d3 from "d3";
import type { ApiClient } from "./api.js";
import { splitExplanation } from "./explanation.js";
import type { GraphNode, NodeReport, SegmentReport, Subgraph } from "./types.js";

type View = { kind: "segment"; doc: SegmentReport } | { kind: "node"; doc: NodeReport };

const SUBGRAPH_WIDTH = 380;
const SUBGRAPH_HEIGHT = 240;

interface LayoutNode extends d3.SimulationNodeDatum {
  id: string;
  doc: GraphNode;
}

interface LayoutLink extends d3.SimulationLinkDatum<LayoutNode> {
  weight: number;
}

export class ReportPanel {
  private history: View[] = [];

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.container.classList.add("report-panel");
  }

  get current(): View | undefined {
    return this.history[this.history.length - 1];
  }

  async showSegment(segmentId: string): Promise<void> {
    const doc = await this.api.segmentReport(segmentId);
    this.push({ kind: "segment", doc });
  }

  async openNode(nodeId: string): Promise<void> {
    const doc = await this.api.nodeReport(nodeId);
    this.push({ kind: "node", doc });
  }

  back(): void {
    if (this.history.length > 1) {
      this.history.pop();
      this.render();
    }
  }

  /** Mark a node in the embedded subgraph; clears previous marks. */
  highlight(nodeId: string): void {
    this.container.querySelectorAll(".sg-node").forEach((el) => {
      el.classList.toggle("highlighted", el.getAttribute("data-node-id") === nodeId);
    });
  }

  private push(view: View): void {
    this.history.push(view);
    this.render();
  }

  private render(): void {
    this.container.replaceChildren();
    const view = this.current;
    if (!view) return;

    const header = el("div", "report-header");
    const backButton = el("button", "back-button", "← back") as HTMLButtonElement;
    backButton.disabled = this.history.length <= 1;
    backButton.addEventListener("click", () => this.back());
    header.append(backButton);

    if (view.kind === "segment") {
      header.append(el("h2", "", `Segment ${view.doc.segment_id}`));
      header.append(el("span", `badge ${view.doc.provenance}`, view.doc.provenance));
      this.container.append(header);
      this.renderSegment(view.doc);
    } else {
      header.append(el("h2", "", view.doc.node.display));
      header.append(el("span", `badge ${view.doc.node.kind}`, view.doc.node.kind));
      this.container.append(header);
      this.renderNode(view.doc);
    }
  }

  private renderSegment(doc: SegmentReport): void {
    const sections = splitExplanation(doc.explanation);

    const fields = el("div", "report-fields");
    for (const attr of doc.static_attributes) {
      fields.append(this.fieldChip(`${attr.attr_class}: ${attr.display}`, attr.node));
    }
    const context = doc.behavior_context;
    for (const [label, nodeId] of [
      ["prev", context.prev],
      ["behavior", context.current],
      ["next", context.next],
    ] as const) {
      if (nodeId !== null) fields.append(this.fieldChip(`${label}: ${nodeId}`, nodeId));
    }
    if (doc.method !== null) fields.append(this.fieldChip(`method: ${doc.method}`, doc.method));
    this.container.append(fields);

    if (doc.fallback_used) {
      this.container.append(el("p", "fallback-notice", "no graph evidence matched; defaults applied"));
    }

    this.container.append(el("h3", "", "Cues"));
    const cues = el("ul", "cue-list");
    for (const line of sections.cues) cues.append(el("li", "cue-line", line));
    this.container.append(cues);

    this.container.append(el("h3", "", "Rationale"));
    this.container.append(el("p", "rationale", sections.rationale));

    this.container.append(el("h3", "", "Evidence"));
    const evidence = el("ul", "evidence-list");
    for (const line of sections.evidence) evidence.append(el("li", "evidence-line", line));
    this.container.append(evidence);

    this.container.append(el("h3", "", "Knowledge subgraph"));
    this.container.append(this.renderSubgraph(doc.subgraph, doc.navigation));
  }

  private renderNode(doc: NodeReport): void {
    const node = doc.node;
    const stats = el("div", "node-stats");
    if (node.seen_count !== undefined) {
      stats.append(el("span", "stat", `seen in ${node.seen_count} segments`));
    }
    if (node.success_count !== undefined) {
      stats.append(el("span", "stat", `${node.success_count} successful imputations`));
    }
    this.container.append(stats);
    if (node.description) this.container.append(el("p", "node-description", node.description));

    this.container.append(el("h3", "", "Neighbors"));
    const table = el("table", "neighbor-table") as HTMLTableElement;
    const head = table.createTHead().insertRow();
    for (const title of ["node", "direction", "weight", "share"]) {
      head.append(el("th", "", title));
    }
    const body = table.createTBody();
    for (const neighbor of doc.neighbors) {
      const row = body.insertRow();
      row.className = "neighbor-row";
      row.setAttribute("data-node-id", neighbor.node);
      const link = el("button", "node-link", neighbor.display);
      link.addEventListener("click", () => void this.openNode(neighbor.node));
      row.insertCell().append(link);
      row.insertCell().textContent = neighbor.direction;
      row.insertCell().textContent = `${neighbor.weight} of ${neighbor.total}`;
      row.insertCell().textContent = `${neighbor.share_percent}%`;
    }
    this.container.append(table);
  }

  private fieldChip(label: string, nodeId: string): HTMLElement {
    const chip = el("button", "field-chip", label);
    chip.setAttribute("data-node", nodeId);
    chip.addEventListener("click", () => this.highlight(nodeId));
    return chip;
  }

  private renderSubgraph(subgraph: Subgraph, navigation: string[]): SVGSVGElement {
    const navigable = new Set(navigation);
    const nodes: LayoutNode[] = subgraph.nodes.map((doc) => ({ id: doc.id, doc }));
    const links: LayoutLink[] = subgraph.edges.map((edge) => ({
      source: edge.a,
      target: edge.b,
      weight: edge.weight,
    }));

    const simulation = d3
      .forceSimulation(nodes)
      .force("link", d3.forceLink<LayoutNode, LayoutLink>(links).id((d) => d.id).distance(90))
      .force("charge", d3.forceManyBody().strength(-220))
      .force("center", d3.forceCenter(SUBGRAPH_WIDTH / 2, SUBGRAPH_HEIGHT / 2))
      .stop();
    simulation.tick(150);

    const svg = d3
      .create("svg")
      .attr("class", "subgraph")
      .attr("viewBox", `0 0 ${SUBGRAPH_WIDTH} ${SUBGRAPH_HEIGHT}`)
      .attr("width", SUBGRAPH_WIDTH)
      .attr("height", SUBGRAPH_HEIGHT);

    svg
      .selectAll("line")
      .data(links)
      .join("line")
      .attr("class", "sg-edge")
      .attr("x1", (d) => (d.source as LayoutNode).x ?? 0)
      .attr("y1", (d) => (d.source as LayoutNode).y ?? 0)
      .attr("x2", (d) => (d.target as LayoutNode).x ?? 0)
      .attr("y2", (d) => (d.target as LayoutNode).y ?? 0)
      .append("title")
      .text((d) => `weight ${d.weight}`);

    const groups = svg
      .selectAll("g")
      .data(nodes)
      .join("g")
      .attr("class", (d) => `sg-node kind-${d.doc.kind}`)
      .attr("data-node-id", (d) => d.id)
      .attr("transform", (d) => `translate(${d.x ?? 0},${d.y ?? 0})`);
    groups
      .append("circle")
      .attr("r", 10)
      .on("click", (_event, d) => {
        if (navigable.has(d.id)) void this.openNode(d.id);
      });
    groups.append("text").attr("class", "sg-label").attr("dy", 22).text((d) => d.doc.display);
    groups.append("title").text((d) => d.id);

    return svg.node()!;
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
