/** Knowledge graph explorer: force layout, filters, drag highlighting.
 *
 * Nodes and edges arrive as service documents. Filtering mirrors the
 * service's own /kg/nodes parameters (kind match, lowercase keyword
 * containment on the id's key part) so the panel and the API agree on
 * what "matches" means.
 */

import * as d3 from "d3";
import type { GraphEdge, GraphNode } from "./types.js";

export interface GraphViewOptions {
  width?: number;
  height?: number;
  onNodeClick?: (nodeId: string) => void;
}

interface SimNode extends d3.SimulationNodeDatum {
  id: string;
  doc: GraphNode;
}

interface SimLink extends d3.SimulationLinkDatum<SimNode> {
  weight: number;
}

/** Key part of a node id, i.e. everything after the kind prefix. */
function idKey(nodeId: string): string {
  const sep = nodeId.indexOf(":");
  return sep === -1 ? nodeId : nodeId.slice(sep + 1);
}

const LABEL_ZOOM_THRESHOLD = 0.8;

export class GraphView {
  private readonly svg: d3.Selection<SVGSVGElement, undefined, null, undefined>;
  private readonly width: number;
  private readonly height: number;
  private readonly onNodeClick: ((nodeId: string) => void) | undefined;
  private nodes: SimNode[] = [];
  private links: SimLink[] = [];
  private kindFilter = "";
  private keyword = "";

  constructor(container: HTMLElement, options: GraphViewOptions = {}) {
    this.width = options.width ?? 720;
    this.height = options.height ?? 480;
    this.onNodeClick = options.onNodeClick;
    this.svg = d3
      .create("svg")
      .attr("class", "graph-view")
      .attr("viewBox", `0 0 ${this.width} ${this.height}`)
      .attr("width", this.width)
      .attr("height", this.height) as d3.Selection<SVGSVGElement, undefined, null, undefined>;
    container.append(this.svg.node()!);
  }

  setData(nodes: GraphNode[], edges: GraphEdge[]): void {
    this.nodes = nodes.map((doc) => ({ id: doc.id, doc }));
    const known = new Set(this.nodes.map((n) => n.id));
    this.links = edges
      .filter((e) => known.has(e.a) && known.has(e.b))
      .map((e) => ({ source: e.a, target: e.b, weight: e.weight }));

    const simulation = d3
      .forceSimulation(this.nodes)
      .force("link", d3.forceLink<SimNode, SimLink>(this.links).id((d) => d.id).distance(70))
      .force("charge", d3.forceManyBody().strength(-160))
      .force("center", d3.forceCenter(this.width / 2, this.height / 2))
      .stop();
    simulation.tick(200);
    this.redraw();
  }

  setKindFilter(kind: string): void {
    this.kindFilter = kind;
    this.applyFilter();
  }

  setKeyword(q: string): void {
    this.keyword = q;
    this.applyFilter();
  }

  /** Mark a node and everything touching it; empty id clears marks. */
  highlightIncident(nodeId: string): void {
    const incident = new Set<string>();
    if (nodeId) {
      incident.add(nodeId);
      for (const link of this.links) {
        const a = (link.source as SimNode).id;
        const b = (link.target as SimNode).id;
        if (a === nodeId) incident.add(b);
        if (b === nodeId) incident.add(a);
      }
    }
    this.svg
      .selectAll<SVGGElement, SimNode>(".graph-node")
      .classed("incident", (d) => incident.has(d.id));
    this.svg
      .selectAll<SVGLineElement, SimLink>(".graph-edge")
      .classed("incident", (d) => {
        const a = (d.source as SimNode).id;
        const b = (d.target as SimNode).id;
        return nodeId !== "" && (a === nodeId || b === nodeId);
      });
  }

  /** Below the threshold labels clutter more than they inform. */
  setZoomLevel(k: number): void {
    this.svg.selectAll(".graph-label").classed("hidden", k < LABEL_ZOOM_THRESHOLD);
  }

  matches(doc: GraphNode): boolean {
    if (this.kindFilter && doc.kind !== this.kindFilter) return false;
    if (this.keyword && !idKey(doc.id).toLowerCase().includes(this.keyword.toLowerCase())) {
      return false;
    }
    return true;
  }

  private visibleIds(): Set<string> {
    return new Set(this.nodes.filter((n) => this.matches(n.doc)).map((n) => n.id));
  }

  private applyFilter(): void {
    const visible = this.visibleIds();
    this.svg
      .selectAll<SVGGElement, SimNode>(".graph-node")
      .classed("hidden", (d) => !visible.has(d.id));
    this.svg
      .selectAll<SVGLineElement, SimLink>(".graph-edge")
      .classed("hidden", (d) => {
        const a = (d.source as SimNode).id;
        const b = (d.target as SimNode).id;
        return !visible.has(a) || !visible.has(b);
      });
  }

  private redraw(): void {
    this.svg.selectAll("*").remove();

    this.svg
      .selectAll("line")
      .data(this.links)
      .join("line")
      .attr("class", "graph-edge")
      .attr("x1", (d) => (d.source as SimNode).x ?? 0)
      .attr("y1", (d) => (d.source as SimNode).y ?? 0)
      .attr("x2", (d) => (d.target as SimNode).x ?? 0)
      .attr("y2", (d) => (d.target as SimNode).y ?? 0)
      .append("title")
      .text((d) => `weight ${d.weight}`);

    const groups = this.svg
      .selectAll<SVGGElement, SimNode>("g")
      .data(this.nodes)
      .join("g")
      .attr("class", (d) => `graph-node kind-${d.doc.kind}`)
      .attr("data-node-id", (d) => d.id)
      .attr("transform", (d) => `translate(${d.x ?? 0},${d.y ?? 0})`);

    groups
      .append("circle")
      .attr("r", 9)
      .on("click", (_event, d) => this.onNodeClick?.(d.id));
    groups
      .append("text")
      .attr("class", "graph-label")
      .attr("dy", 20)
      .text((d) => d.doc.display);
    groups.append("title").text((d) => d.id);

    groups.call(
      d3
        .drag<SVGGElement, SimNode>()
        .on("start", (_event, d) => this.highlightIncident(d.id))
        .on("drag", (event, d) => {
          d.x = event.x;
          d.y = event.y;
          this.positionNode(d);
        })
        .on("end", () => this.highlightIncident("")),
    );

    this.applyFilter();
  }

  private positionNode(node: SimNode): void {
    this.svg
      .selectAll<SVGGElement, SimNode>(".graph-node")
      .filter((d) => d.id === node.id)
      .attr("transform", `translate(${node.x ?? 0},${node.y ?? 0})`);
    this.svg
      .selectAll<SVGLineElement, SimLink>(".graph-edge")
      .attr("x1", (d) => (d.source as SimNode).x ?? 0)
      .attr("y1", (d) => (d.source as SimNode).y ?? 0)
      .attr("x2", (d) => (d.target as SimNode).x ?? 0)
      .attr("y2", (d) => (d.target as SimNode).y ?? 0);
  }
}
