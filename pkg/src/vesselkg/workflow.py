"""Pipeline orchestration: source → trajectories → knowledge graph → imputation.

Two sequential pipelines per job. Construction fetches and cleans the
source data, classifies segment behaviors, benchmarks fillers on
complete segments, and folds everything into the knowledge graph.
Imputation then queries that graph to reconstruct every detected gap.
Work is partitioned by vessel; partial graphs merge commutatively, so
results are independent of worker count and scheduling.
"""

from __future__ import annotations

import json
import logging
import time
import uuid
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .ais import (
    DEFAULT_GAP_THRESHOLD_S,
    DEFAULT_MAX_SEGMENT_DURATION_S,
    DEFAULT_V_MAX_KN,
    Gap,
    Segment,
    Trajectory,
    assemble,
    filter_time_window,
    iter_records,
    max_internal_speed_kn,
    median_sampling_interval_s,
    segment_trajectory,
)
from .behavior import (
    Abstractor,
    AbstractionFailure,
    PortDirectory,
    RuleBasedAbstractor,
    RuleConfig,
    gap_static_attrs,
    segment_static_attrs,
)
from .graph import KnowledgeGraph, NodeId, behavior_node_id
from .imputation import (
    DEFAULT_TARGET_INTERVAL_S,
    FillContext,
    GapContext,
    ImputedSegment,
    MethodRegistry,
    benchmark,
    impute_gap,
    scaled_control_point,
)
from .sources import FetchFailure, SourceConfig, fetch, resolve

logger = logging.getLogger(__name__)

PHASES = ("downloading", "ingesting", "building_kg", "imputing", "done", "failed")


class JobFailed(RuntimeError):
    def __init__(self, phase: str, cause: str):
        super().__init__(f"job failed during {phase}: {cause}")
        self.phase = phase
        self.cause = cause


def default_ports_path() -> Path:
    return Path(str(resources.files(__package__).joinpath("data/ports_dk.csv")))


def bundled_sample_path() -> Path:
    return Path(str(resources.files(__package__).joinpath("data/sample_ais.csv")))


@dataclass
class JobConfig:
    """Everything one job needs; loadable from a single JSON file."""

    source: SourceConfig
    gap_threshold_s: int = DEFAULT_GAP_THRESHOLD_S
    max_segment_duration_s: int = DEFAULT_MAX_SEGMENT_DURATION_S
    # None: use each vessel's median raw sampling interval (fallback 60 s)
    target_interval_s: int | None = None
    v_max_kn: float = DEFAULT_V_MAX_KN
    rule_config: str | None = None
    port_directory: str | None = None
    worker_count: int = 1

    def __post_init__(self) -> None:
        if self.gap_threshold_s <= 0:
            raise ValueError("gap_threshold_s must be positive")
        if self.max_segment_duration_s <= 0:
            raise ValueError("max_segment_duration_s must be positive")
        if self.target_interval_s is not None and self.target_interval_s <= 0:
            raise ValueError("target_interval_s must be positive")
        if self.v_max_kn <= 0:
            raise ValueError("v_max_kn must be positive")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")

    @classmethod
    def from_doc(cls, doc: dict) -> "JobConfig":
        known = {
            "source",
            "gap_threshold_s",
            "max_segment_duration_s",
            "target_interval_s",
            "v_max_kn",
            "rule_config",
            "port_directory",
            "worker_count",
        }
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown job config fields: {sorted(unknown)}")
        if "source" not in doc:
            raise ValueError("job config needs a source")
        kwargs = {k: v for k, v in doc.items() if k != "source"}
        return cls(source=SourceConfig.from_doc(doc["source"]), **kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "JobConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_doc(json.load(handle))

    def to_doc(self) -> dict:
        return {
            "source": self.source.to_doc(),
            "gap_threshold_s": self.gap_threshold_s,
            "max_segment_duration_s": self.max_segment_duration_s,
            "target_interval_s": self.target_interval_s,
            "v_max_kn": self.v_max_kn,
            "rule_config": self.rule_config,
            "port_directory": self.port_directory,
            "worker_count": self.worker_count,
        }

    def load_ports(self) -> PortDirectory:
        path = self.port_directory or default_ports_path()
        return PortDirectory.from_file(path)

    def load_rules(self) -> RuleConfig:
        if self.rule_config is None:
            return RuleConfig()
        return RuleConfig.from_file(self.rule_config)


@dataclass
class JobStatus:
    """Phase and counters of one job; counters only ever increase."""

    job_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    phase: str = "downloading"
    counters: Counter = field(default_factory=Counter)
    dropped: Counter = field(default_factory=Counter)
    fetch_statuses: list[dict] = field(default_factory=list)
    timings_s: dict[str, float] = field(default_factory=dict)
    error: str | None = None
    _phase_started: float = field(default_factory=time.monotonic, repr=False)

    def advance(self, phase: str) -> None:
        if phase not in PHASES:
            raise ValueError(f"unknown phase: {phase!r}")
        if phase != "failed" and PHASES.index(phase) < PHASES.index(self.phase):
            raise ValueError(f"cannot move back from {self.phase} to {phase}")
        self._close_timing()
        self.phase = phase

    def fail(self, cause: str) -> None:
        self._close_timing()
        self.phase = "failed"
        self.error = cause

    def _close_timing(self) -> None:
        now = time.monotonic()
        self.timings_s[self.phase] = self.timings_s.get(self.phase, 0.0) + (
            now - self._phase_started
        )
        self._phase_started = now

    def to_doc(self) -> dict:
        from .documents import SCHEMA_VERSION

        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "job_status",
            "job_id": self.job_id,
            "phase": self.phase,
            "counters": dict(sorted(self.counters.items())),
            "dropped": dict(sorted(self.dropped.items())),
            "fetch": list(self.fetch_statuses),
            "timings_s": {k: round(v, 3) for k, v in sorted(self.timings_s.items())},
            "error": self.error,
        }


# --- construction pipeline ----------------------------------------------------


def ingest_source(cfg: JobConfig, status: JobStatus) -> list[Trajectory]:
    """Fetch, parse, window-filter, and assemble the configured source.

    Per-day fetch failures are recorded and skipped; an unresolvable
    source fails the job.
    """
    try:
        entries = resolve(cfg.source)
    except Exception as exc:
        status.fail(str(exc))
        raise JobFailed("downloading", str(exc)) from exc

    paths = []
    for day, location in entries:
        try:
            path = fetch((day, location), cfg.source.cache_dir, cfg.source.name)
        except FetchFailure as exc:
            logger.warning("fetch failed for %s: %s", day, exc)
            status.fetch_statuses.append(
                {"date": day.isoformat(), "status": "failed", "detail": str(exc)}
            )
            continue
        status.fetch_statuses.append({"date": day.isoformat(), "status": "ok"})
        paths.append(path)

    status.advance("ingesting")
    records = []
    failures: Counter = Counter()
    for path in paths:
        day_records = list(iter_records(path, failures=failures))
        kept = list(filter_time_window(day_records, cfg.source.time_interval))
        status.dropped["outside_time_window"] += len(day_records) - len(kept)
        status.counters["records_parsed"] += len(day_records)
        records.extend(kept)
    for reason, count in failures.items():
        status.dropped[reason] += count
        status.counters["records_parsed"] += count

    result = assemble(records, cfg.v_max_kn)
    for reason, count in result.dropped.items():
        status.dropped[reason] += count
    status.counters["trajectories"] += len(result.trajectories)
    return result.trajectories


@dataclass
class _VesselBuild:
    """Per-vessel construction output, merged into the job totals."""

    graph: KnowledgeGraph
    segments: list[Segment]
    gaps: list[Gap]
    dropped_records: int = 0


def _build_vessel(
    traj: Trajectory,
    cfg: JobConfig,
    ports: PortDirectory,
    abstractor: Abstractor,
    registry: MethodRegistry,
) -> _VesselBuild:
    graph = KnowledgeGraph()
    segments, gaps = segment_trajectory(traj, cfg.gap_threshold_s, cfg.max_segment_duration_s)

    kept = []
    dropped_records = 0
    for seg in segments:
        if len(seg.records) >= 2 and max_internal_speed_kn(seg) > cfg.v_max_kn:
            dropped_records += len(seg.records)
            continue
        kept.append(seg)

    prev_pattern = None
    for seg in kept:
        if not seg.eligible_for_behavior:
            continue
        try:
            pattern = abstractor.abstract(seg, ports)
        except AbstractionFailure:
            continue
        seg.behavior_id = str(behavior_node_id(pattern.name))
        attrs = segment_static_attrs(seg.records, ports)

        best_method = None
        method_display = method_description = ""
        if len(seg.records) >= 5:
            best_method = benchmark(seg, registry).best_method_key
            spec = registry.get(best_method)
            method_display, method_description = spec.display, spec.description
        graph.observe_segment(
            attrs,
            pattern,
            best_method=best_method,
            prev_behavior=prev_pattern,
            method_display=method_display,
            method_description=method_description,
        )
        prev_pattern = pattern

    return _VesselBuild(graph=graph, segments=kept, gaps=gaps, dropped_records=dropped_records)


def build_graph(
    trajectories: list[Trajectory],
    cfg: JobConfig,
    status: JobStatus,
    registry: MethodRegistry | None = None,
    abstractor: Abstractor | None = None,
) -> tuple[KnowledgeGraph, list[Segment], list[Gap]]:
    """Classify, benchmark, and observe every vessel into one merged graph."""
    registry = registry or MethodRegistry.default()
    abstractor = abstractor or RuleBasedAbstractor(cfg.load_rules())
    ports = cfg.load_ports()
    status.advance("building_kg")

    builds: list[_VesselBuild]
    if cfg.worker_count == 1 or len(trajectories) <= 1:
        builds = [_build_vessel(t, cfg, ports, abstractor, registry) for t in trajectories]
    else:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as pool:
            builds = list(
                pool.map(lambda t: _build_vessel(t, cfg, ports, abstractor, registry), trajectories)
            )

    graph = KnowledgeGraph()
    segments: list[Segment] = []
    gaps: list[Gap] = []
    for build in builds:
        graph = graph.merge(build.graph)
        segments.extend(build.segments)
        gaps.extend(build.gaps)
        status.dropped["segment_speed"] += build.dropped_records

    segments.sort(key=lambda s: (s.vessel_id, s.records[0].epoch_s))
    gaps.sort(key=lambda g: (g.vessel_id, g.before.epoch_s))
    status.counters["records_kept"] += sum(len(s.records) for s in segments)
    status.counters["segments"] += len(segments)
    status.counters["gaps"] += len(gaps)
    return graph, segments, gaps


def run_construction(
    cfg: JobConfig,
    status: JobStatus | None = None,
    registry: MethodRegistry | None = None,
    abstractor: Abstractor | None = None,
) -> tuple[KnowledgeGraph, list[Segment], JobStatus]:
    """The full construction pipeline: fetch → clean → classify → graph."""
    status = status or JobStatus()
    trajectories = ingest_source(cfg, status)
    try:
        graph, segments, _ = build_graph(trajectories, cfg, status, registry, abstractor)
    except JobFailed:
        raise
    except Exception as exc:
        phase = status.phase
        status.fail(str(exc))
        raise JobFailed(phase, str(exc)) from exc
    return graph, segments, status


# --- imputation pipeline --------------------------------------------------------


def _segment_boundaries(segments: list[Segment]) -> tuple[dict, dict]:
    by_end = {seg.records[-1].epoch_s: seg for seg in segments if seg.records}
    by_start = {seg.records[0].epoch_s: seg for seg in segments if seg.records}
    return by_end, by_start


def _behavior_of(seg: Segment | None) -> NodeId | None:
    if seg is None or seg.behavior_id is None:
        return None
    return NodeId.parse(seg.behavior_id)


def gap_context(
    gap: Gap,
    segments: list[Segment],
    ports: PortDirectory,
) -> GapContext:
    """Assemble the local context the graph is queried with for one gap."""
    by_end, by_start = _segment_boundaries(segments)
    prev_seg = by_end.get(gap.before.epoch_s)
    next_seg = by_start.get(gap.after.epoch_s)

    p0 = p3 = None
    if prev_seg is not None and len(prev_seg.records) >= 2:
        p0 = scaled_control_point(gap.before, prev_seg.records[-2], gap.dt_s)
    if next_seg is not None and len(next_seg.records) >= 2:
        p3 = scaled_control_point(gap.after, next_seg.records[1], gap.dt_s)

    return GapContext(
        gap=gap,
        static_attrs=gap_static_attrs(gap.before, gap.after, ports),
        prev_behavior=_behavior_of(prev_seg),
        next_behavior=_behavior_of(next_seg),
        fill_context=FillContext(p0=p0, p3=p3),
    )


def run_imputation(
    g: KnowledgeGraph,
    trajectories: list[Trajectory],
    cfg: JobConfig,
    status: JobStatus | None = None,
    registry: MethodRegistry | None = None,
    abstractor: Abstractor | None = None,
    finish: bool = True,
) -> tuple[list[ImputedSegment], JobStatus]:
    """Reconstruct every detected gap by querying the graph.

    Deterministic given (g, trajectories, cfg): vessels are processed in
    id order and output is sorted by (vessel, gap start). With
    finish=False the status is left in the imputing phase so an
    orchestrator can mark done only once results are durably swapped in.
    """
    status = status or JobStatus(phase="imputing")
    if status.phase != "imputing":
        status.advance("imputing")
    registry = registry or MethodRegistry.default()
    abstractor = abstractor or RuleBasedAbstractor(cfg.load_rules())
    ports = cfg.load_ports()

    def impute_vessel(traj: Trajectory) -> list[ImputedSegment]:
        segments, gaps = segment_trajectory(traj, cfg.gap_threshold_s, cfg.max_segment_duration_s)
        segments = [
            s
            for s in segments
            if len(s.records) < 2 or max_internal_speed_kn(s) <= cfg.v_max_kn
        ]
        for seg in segments:
            if seg.eligible_for_behavior:
                try:
                    seg.behavior_id = str(behavior_node_id(abstractor.abstract(seg, ports).name))
                except AbstractionFailure:
                    pass
        interval = (
            cfg.target_interval_s
            or median_sampling_interval_s(traj.records)
            or DEFAULT_TARGET_INTERVAL_S
        )
        out = []
        for gap in gaps:
            ctx = gap_context(gap, segments, ports)
            out.append(impute_gap(g, registry, ctx, interval))
        return out

    ordered = sorted(trajectories, key=lambda t: t.vessel_id)
    if cfg.worker_count == 1 or len(ordered) <= 1:
        chunks = [impute_vessel(t) for t in ordered]
    else:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as pool:
            chunks = list(pool.map(impute_vessel, ordered))

    imputed = [seg for chunk in chunks for seg in chunk]
    imputed.sort(key=lambda s: (s.vessel_id, s.records[0].epoch_s))
    status.counters["imputed_segments"] += len(imputed)
    status.counters["fallbacks"] += sum(1 for s in imputed if s.fallback_used)
    if finish:
        status.advance("done")
    return imputed, status
