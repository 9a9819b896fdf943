/** Track map: one polyline per segment, imputed spans styled apart.
 *
 * Pure presentation. Coordinates come straight from segment records;
 * the view scales them into the SVG viewport and never edits them.
 */

import * as d3 from "d3";
import type { SegmentDoc } from "./types.js";

export interface MapOptions {
  width?: number;
  height?: number;
  onSegmentClick?: (segment: SegmentDoc) => void;
}

const PAD = 16;

export class MapView {
  private readonly svg: d3.Selection<SVGSVGElement, undefined, null, undefined>;
  private readonly width: number;
  private readonly height: number;
  private readonly onSegmentClick: ((segment: SegmentDoc) => void) | undefined;
  private segments: SegmentDoc[] = [];
  private imputedVisible = true;

  constructor(container: HTMLElement, options: MapOptions = {}) {
    this.width = options.width ?? 640;
    this.height = options.height ?? 420;
    this.onSegmentClick = options.onSegmentClick;
    this.svg = d3
      .create("svg")
      .attr("class", "track-map")
      .attr("viewBox", `0 0 ${this.width} ${this.height}`)
      .attr("width", this.width)
      .attr("height", this.height) as d3.Selection<SVGSVGElement, undefined, null, undefined>;
    container.append(this.svg.node()!);
  }

  setSegments(segments: SegmentDoc[]): void {
    this.segments = segments;
    this.redraw();
  }

  /** Show or hide imputed tracks; raw tracks stay put. */
  toggleImputed(visible: boolean): void {
    this.imputedVisible = visible;
    this.svg.selectAll<SVGPathElement, SegmentDoc>(".track.imputed").classed("hidden", !visible);
  }

  private redraw(): void {
    this.svg.selectAll("*").remove();
    const points = this.segments.flatMap((s) => s.records);
    if (points.length === 0) return;

    let [lonMin, lonMax] = d3.extent(points, (p) => p.lon) as [number, number];
    let [latMin, latMax] = d3.extent(points, (p) => p.lat) as [number, number];
    // degenerate extents (single point, straight vertical line) still need area
    if (lonMin === lonMax) [lonMin, lonMax] = [lonMin - 0.001, lonMax + 0.001];
    if (latMin === latMax) [latMin, latMax] = [latMin - 0.001, latMax + 0.001];

    const x = d3.scaleLinear().domain([lonMin, lonMax]).range([PAD, this.width - PAD]);
    const y = d3.scaleLinear().domain([latMin, latMax]).range([this.height - PAD, PAD]);
    const line = d3
      .line<{ lat: number; lon: number }>()
      .x((p) => x(p.lon))
      .y((p) => y(p.lat));

    this.svg
      .selectAll("path")
      .data(this.segments)
      .join("path")
      .attr("class", (s) => `track ${s.provenance}`)
      .classed("hidden", (s) => s.provenance === "imputed" && !this.imputedVisible)
      .attr("data-segment-id", (s) => s.segment_id)
      .attr("fill", "none")
      .attr("d", (s) => line(s.records))
      .on("click", (_event, s) => this.onSegmentClick?.(s))
      .append("title")
      .text((s) => `${s.segment_id} (${s.provenance}, ${s.records.length} points)`);
  }
}
