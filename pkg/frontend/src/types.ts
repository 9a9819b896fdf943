/** Wire document schemas. Every service response is validated at the
 * boundary and rendered verbatim; the UI computes nothing itself. */

import { z } from "zod";

export const recordSchema = z.object({
  vessel_id: z.number(),
  timestamp: z.string(),
  lat: z.number(),
  lon: z.number(),
  nav_status: z.string(),
  vessel_type: z.string(),
  sog: z.number().optional(),
  cog: z.number().optional(),
  heading: z.number().optional(),
  length_m: z.number().optional(),
  width_m: z.number().optional(),
  draught_m: z.number().optional(),
  cargo_type: z.string().optional(),
});

export const trajectorySummarySchema = z.object({
  mmsi: z.number(),
  record_count: z.number(),
  time_from: z.string(),
  time_to: z.string(),
  bbox: z.tuple([z.number(), z.number(), z.number(), z.number()]),
});

export const trajectoryPageSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("trajectory_page"),
  total: z.number(),
  trajectories: z.array(trajectorySummarySchema),
});

export const evidenceSchema = z.object({
  kind: z.enum(["attribute", "transition", "method", "override"]),
  source: z.string(),
  target: z.string(),
  weight: z.number(),
  total: z.number(),
  share: z.number(),
  note: z.string().optional(),
});

export const segmentSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("segment"),
  segment_id: z.string(),
  vessel_id: z.number(),
  provenance: z.enum(["raw", "imputed"]),
  behavior_id: z.string().nullable(),
  records: z.array(recordSchema),
  method_key: z.string().optional(),
  evidence: z.array(evidenceSchema).optional(),
  fallback_used: z.boolean().optional(),
});

export const segmentPageSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("segment_page"),
  mmsi: z.number(),
  segments: z.array(segmentSchema),
});

export const graphNodeSchema = z.object({
  id: z.string(),
  kind: z.enum(["static_attr", "behavior", "method"]),
  display: z.string(),
  description: z.string().optional(),
  attr_class: z.string().optional(),
  method_key: z.string().optional(),
  seen_count: z.number().optional(),
  success_count: z.number().optional(),
});

export const graphEdgeSchema = z.object({
  a: z.string(),
  b: z.string(),
  weight: z.number(),
});

export const subgraphSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("subgraph"),
  nodes: z.array(graphNodeSchema),
  edges: z.array(graphEdgeSchema),
});

export const segmentReportSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("segment_report"),
  segment_id: z.string(),
  provenance: z.enum(["raw", "imputed"]),
  static_attributes: z.array(
    z.object({ attr_class: z.string(), display: z.string(), node: z.string() }),
  ),
  behavior_context: z.object({
    prev: z.string().nullable(),
    current: z.string().nullable(),
    next: z.string().nullable(),
  }),
  explanation: z.string(),
  method: z.string().nullable(),
  evidence: z.array(evidenceSchema),
  fallback_used: z.boolean(),
  subgraph: subgraphSchema,
  navigation: z.array(z.string()),
});

export const nodePageSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("node_page"),
  total: z.number(),
  nodes: z.array(graphNodeSchema),
});

export const nodeNeighborSchema = z.object({
  node: z.string(),
  display: z.string(),
  kind: z.string(),
  direction: z.enum(["in", "out"]),
  weight: z.number(),
  total: z.number(),
  share_percent: z.string(),
});

export const nodeReportSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("node_report"),
  node: graphNodeSchema,
  neighbors: z.array(nodeNeighborSchema),
  navigation: z.array(z.string()),
});

export const neighborPageSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("neighbor_page"),
  node: z.string(),
  neighbors: z.array(nodeNeighborSchema),
});

export const jobSubmittedSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("job_submitted"),
  job_id: z.string(),
});

export const jobStatusSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("job_status"),
  job_id: z.string(),
  phase: z.enum(["downloading", "ingesting", "building_kg", "imputing", "done", "failed"]),
  counters: z.record(z.string(), z.number()),
  dropped: z.record(z.string(), z.number()),
  fetch: z.array(
    z.object({ date: z.string(), status: z.string(), detail: z.string().optional() }),
  ),
  timings_s: z.record(z.string(), z.number()),
  error: z.string().nullable(),
});

export const errorSchema = z.object({
  schema_version: z.string(),
  kind: z.literal("error"),
  detail: z.string(),
});

export type RecordDoc = z.infer<typeof recordSchema>;
export type TrajectorySummary = z.infer<typeof trajectorySummarySchema>;
export type TrajectoryPage = z.infer<typeof trajectoryPageSchema>;
export type EvidenceDoc = z.infer<typeof evidenceSchema>;
export type SegmentDoc = z.infer<typeof segmentSchema>;
export type SegmentPage = z.infer<typeof segmentPageSchema>;
export type GraphNode = z.infer<typeof graphNodeSchema>;
export type GraphEdge = z.infer<typeof graphEdgeSchema>;
export type Subgraph = z.infer<typeof subgraphSchema>;
export type SegmentReport = z.infer<typeof segmentReportSchema>;
export type NodePage = z.infer<typeof nodePageSchema>;
export type NodeNeighbor = z.infer<typeof nodeNeighborSchema>;
export type NodeReport = z.infer<typeof nodeReportSchema>;
export type NeighborPage = z.infer<typeof neighborPageSchema>;
export type JobSubmitted = z.infer<typeof jobSubmittedSchema>;
export type JobStatus = z.infer<typeof jobStatusSchema>;
export type JobPhase = JobStatus["phase"];
