/** Typed client for the /v1 service endpoints.
 *
 * The base URL and fetch implementation are injectable so the app can
 * point at any deployment and the tests can replay recorded responses.
 */

import { z } from "zod";
import {
  errorSchema,
  jobStatusSchema,
  jobSubmittedSchema,
  neighborPageSchema,
  nodePageSchema,
  nodeReportSchema,
  segmentPageSchema,
  segmentReportSchema,
  subgraphSchema,
  trajectoryPageSchema,
  type JobStatus,
  type JobSubmitted,
  type NeighborPage,
  type NodePage,
  type NodeReport,
  type SegmentPage,
  type SegmentReport,
  type Subgraph,
  type TrajectoryPage,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface TrajectoryFilters {
  mmsi?: number;
  timeFrom?: string;
  timeTo?: string;
  /** [minLon, minLat, maxLon, maxLat] */
  bbox?: [number, number, number, number];
  limit?: number;
  offset?: number;
}

export function trajectoryQuery(filters: TrajectoryFilters): string {
  const params = new URLSearchParams();
  if (filters.mmsi !== undefined) params.set("mmsi", String(filters.mmsi));
  if (filters.timeFrom) params.set("time_from", filters.timeFrom);
  if (filters.timeTo) params.set("time_to", filters.timeTo);
  if (filters.bbox) params.set("bbox", filters.bbox.join(","));
  if (filters.limit !== undefined) params.set("limit", String(filters.limit));
  if (filters.offset !== undefined) params.set("offset", String(filters.offset));
  const text = params.toString();
  return text ? `?${text}` : "";
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(schema: z.ZodType<T>, path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body: unknown = await response.json();
    if (!response.ok) {
      const error = errorSchema.safeParse(body);
      throw new ApiError(response.status, error.success ? error.data.detail : response.statusText);
    }
    return schema.parse(body);
  }

  listTrajectories(filters: TrajectoryFilters = {}): Promise<TrajectoryPage> {
    return this.request(trajectoryPageSchema, `/v1/trajectories${trajectoryQuery(filters)}`);
  }

  vesselSegments(mmsi: number): Promise<SegmentPage> {
    return this.request(segmentPageSchema, `/v1/vessels/${mmsi}/segments`);
  }

  segmentReport(segmentId: string): Promise<SegmentReport> {
    return this.request(segmentReportSchema, `/v1/segments/${encodeURIComponent(segmentId)}/report`);
  }

  segmentSubgraph(segmentId: string): Promise<Subgraph> {
    return this.request(subgraphSchema, `/v1/segments/${encodeURIComponent(segmentId)}/subgraph`);
  }

  kgNodes(options: { kind?: string; q?: string } = {}): Promise<NodePage> {
    const params = new URLSearchParams();
    if (options.kind) params.set("kind", options.kind);
    if (options.q) params.set("q", options.q);
    const query = params.toString();
    return this.request(nodePageSchema, `/v1/kg/nodes${query ? `?${query}` : ""}`);
  }

  nodeReport(nodeId: string): Promise<NodeReport> {
    return this.request(nodeReportSchema, `/v1/kg/nodes/${encodeURIComponent(nodeId)}`);
  }

  nodeNeighbors(nodeId: string): Promise<NeighborPage> {
    return this.request(neighborPageSchema, `/v1/kg/nodes/${encodeURIComponent(nodeId)}/neighbors`);
  }

  submitJob(config: Record<string, unknown>): Promise<JobSubmitted> {
    return this.request(jobSubmittedSchema, "/v1/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  jobStatus(jobId: string): Promise<JobStatus> {
    return this.request(jobStatusSchema, `/v1/jobs/${encodeURIComponent(jobId)}`);
  }
}
