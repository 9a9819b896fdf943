"""Knowledge-driven trajectory gap filling.

A gap's local context (static attributes, neighboring behaviors) is used
to rank the most plausible behavior pattern in the knowledge graph, the
behavior's success statistics pick an imputation method, and the method's
filler reconstructs the missing points. Fillers are registered in a
:class:`MethodRegistry`; the same fillers are benchmarked on complete
segments (mask the interior, reconstruct, score against the hidden truth)
to learn which method succeeds for which behavior.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from fractions import Fraction
from typing import Callable, Iterator

from .ais import AisRecord, Gap, Segment
from .behavior import STATIONARY, TRANSIT, TooShort
from .geo import haversine_m, interpolate_angle_deg
from .graph import (
    EmptyRanking,
    KnowledgeGraph,
    NodeId,
    behavior_node_id,
    method_node_id,
    static_attr_id,
)

logger = logging.getLogger(__name__)

DEFAULT_TARGET_INTERVAL_S = 60
FALLBACK_METHOD_KEY = "linear"


class UnknownMethod(KeyError):
    """The graph references a method key the registry cannot resolve."""


@dataclass(frozen=True)
class TrackPoint:
    """A reconstructed point inside a gap."""

    timestamp: datetime
    lat: float
    lon: float
    sog: float | None = None
    cog: float | None = None


@dataclass(frozen=True)
class FillContext:
    """Outer control points for curve fillers: p0 before the gap, p3 after.

    The cubic assumes its four control points are uniformly spaced in
    time, so context builders re-space the raw neighbor records with
    :func:`scaled_control_point` rather than passing them through.
    """

    p0: tuple[float, float] | None = None
    p3: tuple[float, float] | None = None


def scaled_control_point(
    endpoint: AisRecord, neighbor: AisRecord, span_s: float
) -> tuple[float, float] | None:
    """Re-space a neighbor record to one gap-span from its gap endpoint.

    Extrapolates the endpoint->neighbor secant to span_s seconds, which
    places the control point where the uniform spline expects it
    (estimated local velocity times the gap duration). Collinear
    uniformly sampled data therefore still degenerates to the chord.
    """
    dt = abs(endpoint.epoch_s - neighbor.epoch_s)
    if dt == 0:
        return None
    scale = span_s / dt
    return (
        endpoint.lat + (neighbor.lat - endpoint.lat) * scale,
        endpoint.lon + (neighbor.lon - endpoint.lon) * scale,
    )


Filler = Callable[[Gap, list[datetime], FillContext], list[TrackPoint]]


@dataclass(frozen=True)
class MethodSpec:
    key: str
    display: str
    description: str
    filler: Filler


class MethodRegistry:
    """Named executable fillers; keys are stable across runs."""

    def __init__(self) -> None:
        self._methods: dict[str, MethodSpec] = {}

    def register(self, spec: MethodSpec) -> None:
        if spec.key in self._methods:
            raise ValueError(f"method {spec.key!r} already registered")
        self._methods[spec.key] = spec

    def get(self, key: str) -> MethodSpec:
        try:
            return self._methods[key]
        except KeyError:
            raise UnknownMethod(key) from None

    def __contains__(self, key: str) -> bool:
        return key in self._methods

    def keys(self) -> list[str]:
        return sorted(self._methods)

    def __iter__(self) -> Iterator[MethodSpec]:
        return iter(self._methods[k] for k in self.keys())

    @classmethod
    def default(cls) -> "MethodRegistry":
        registry = cls()
        registry.register(
            MethodSpec(
                "linear",
                "Linear Filler",
                "Straight-line interpolation of position and kinematics between the gap endpoints.",
                linear_fill,
            )
        )
        registry.register(
            MethodSpec(
                "smooth_curve",
                "Smooth Curve Filler",
                "Catmull-Rom cubic through the gap endpoints, guided by one neighbor point on each side.",
                smooth_curve_fill,
            )
        )
        registry.register(
            MethodSpec(
                "stationary",
                "Stationary Filler",
                "Holds the last known position across the gap with zero speed.",
                stationary_fill,
            )
        )
        return registry


# --- fillers ----------------------------------------------------------------


def resample_times(gap: Gap, target_interval_s: float) -> list[datetime]:
    """Evenly spaced interior timestamps for a gap.

    Produces max(0, round(dt / interval) - 1) timestamps strictly inside
    (before, after); spacing is uniform to sub-second precision.
    """
    if target_interval_s <= 0:
        raise ValueError("target_interval_s must be positive")
    dt = (gap.after.timestamp - gap.before.timestamp).total_seconds()
    n = max(0, round(dt / target_interval_s) - 1)
    step = dt / (n + 1)
    return [gap.before.timestamp + timedelta(seconds=step * i) for i in range(1, n + 1)]


def _time_fraction(gap: Gap, t: datetime) -> float:
    span = (gap.after.timestamp - gap.before.timestamp).total_seconds()
    return (t - gap.before.timestamp).total_seconds() / span


def _kinematics(gap: Gap, frac: float) -> tuple[float | None, float | None]:
    sog = None
    if gap.before.sog is not None and gap.after.sog is not None:
        sog = gap.before.sog + (gap.after.sog - gap.before.sog) * frac
    cog = None
    if gap.before.cog is not None and gap.after.cog is not None:
        cog = interpolate_angle_deg(gap.before.cog, gap.after.cog, frac)
    return sog, cog


def linear_fill(gap: Gap, times: list[datetime], ctx: FillContext = FillContext()) -> list[TrackPoint]:
    """Linear interpolation of lat/lon (and sog/cog when both endpoints have them)."""
    points = []
    for t in times:
        frac = _time_fraction(gap, t)
        sog, cog = _kinematics(gap, frac)
        points.append(
            TrackPoint(
                timestamp=t,
                lat=gap.before.lat + (gap.after.lat - gap.before.lat) * frac,
                lon=gap.before.lon + (gap.after.lon - gap.before.lon) * frac,
                sog=sog,
                cog=cog,
            )
        )
    return points


def _catmull_rom(p0: float, p1: float, p2: float, p3: float, t: float) -> float:
    # Uniform Catmull-Rom cubic with endpoint interpolation: C(0)=p1, C(1)=p2.
    # The boundary is pinned explicitly so it is exact in floating point too.
    if t == 0.0:
        return p1
    if t == 1.0:
        return p2
    return 0.5 * (
        2.0 * p1
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t
    )


def smooth_curve_fill(gap: Gap, times: list[datetime], ctx: FillContext = FillContext()) -> list[TrackPoint]:
    """Catmull-Rom spline through the gap endpoints.

    Control points: p1 = gap.before, p2 = gap.after; p0/p3 come from the
    surrounding trajectory and are mirrored (p0 = 2 p1 - p2,
    p3 = 2 p2 - p1) when unavailable, which degrades gracefully to the
    linear fill. Interpolation runs componentwise on lat and lon in
    degree space.
    """
    p1 = (gap.before.lat, gap.before.lon)
    p2 = (gap.after.lat, gap.after.lon)
    p0 = ctx.p0 if ctx.p0 is not None else (2 * p1[0] - p2[0], 2 * p1[1] - p2[1])
    p3 = ctx.p3 if ctx.p3 is not None else (2 * p2[0] - p1[0], 2 * p2[1] - p1[1])

    points = []
    for t in times:
        frac = _time_fraction(gap, t)
        sog, cog = _kinematics(gap, frac)
        points.append(
            TrackPoint(
                timestamp=t,
                lat=_catmull_rom(p0[0], p1[0], p2[0], p3[0], frac),
                lon=_catmull_rom(p0[1], p1[1], p2[1], p3[1], frac),
                sog=sog,
                cog=cog,
            )
        )
    return points


def stationary_fill(gap: Gap, times: list[datetime], ctx: FillContext = FillContext()) -> list[TrackPoint]:
    """Every interior point holds gap.before's position with zero speed."""
    return [
        TrackPoint(timestamp=t, lat=gap.before.lat, lon=gap.before.lon, sog=0.0, cog=None)
        for t in times
    ]


# --- knowledge-driven selection ----------------------------------------------


@dataclass(frozen=True)
class Evidence:
    """One graph statistic that contributed to a selection decision."""

    kind: str  # "attribute" | "transition" | "method" | "override"
    source: str  # NodeId string
    target: str  # NodeId string
    weight: int
    total: int
    note: str = ""

    @property
    def share(self) -> float:
        return float(Fraction(self.weight, self.total)) if self.total else 0.0

    def to_doc(self) -> dict:
        doc = {
            "kind": self.kind,
            "source": self.source,
            "target": self.target,
            "weight": self.weight,
            "total": self.total,
            "share": self.share,
        }
        if self.note:
            doc["note"] = self.note
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "Evidence":
        return cls(
            kind=doc["kind"],
            source=doc["source"],
            target=doc["target"],
            weight=int(doc["weight"]),
            total=int(doc["total"]),
            note=doc.get("note", ""),
        )


@dataclass
class GapContext:
    """Everything the selector knows about a gap's surroundings."""

    gap: Gap
    static_attrs: set[tuple[str, str]]
    prev_behavior: NodeId | None = None
    next_behavior: NodeId | None = None
    fill_context: FillContext = field(default_factory=FillContext)


@dataclass
class Selection:
    behavior: NodeId
    method_key: str
    evidence: list[Evidence]
    fallback_used: bool


@dataclass
class ImputedSegment(Segment):
    """A reconstructed segment spanning a gap, boundary records included."""

    method_key: str = ""
    evidence: list[Evidence] = field(default_factory=list)
    fallback_used: bool = False

    @property
    def estimated_behavior(self) -> str | None:
        return self.behavior_id


def estimate_and_select(g: KnowledgeGraph, ctx: GapContext) -> Selection:
    """Estimate the gap's behavior and pick an imputation method.

    Falls back to Transit / linear (flagged) when the graph has no
    positive-score candidate at either stage; evidence lists every edge
    and transition statistic behind the winning choices.
    """
    evidence: list[Evidence] = []
    fallback = False

    try:
        behavior = g.rank_behaviors(ctx.static_attrs, ctx.prev_behavior, k=1)[0][0]
    except EmptyRanking:
        behavior = behavior_node_id(TRANSIT.name)
        fallback = True
    else:
        for attr_class, display in sorted(ctx.static_attrs):
            static_id = static_attr_id(attr_class, display)
            weight = g.edge_weight(static_id, behavior)
            if weight > 0:
                evidence.append(
                    Evidence(
                        kind="attribute",
                        source=str(static_id),
                        target=str(behavior),
                        weight=weight,
                        total=g.out_weight_total(static_id),
                    )
                )
        if ctx.prev_behavior is not None:
            t_weight = g.transition_weight(ctx.prev_behavior, behavior)
            if t_weight > 0:
                evidence.append(
                    Evidence(
                        kind="transition",
                        source=str(ctx.prev_behavior),
                        target=str(behavior),
                        weight=t_weight,
                        total=g.transition_total(ctx.prev_behavior),
                    )
                )

    try:
        method_node = g.rank_methods(behavior, k=1)[0][0]
    except EmptyRanking:
        method_key = FALLBACK_METHOD_KEY
        fallback = True
    else:
        node = g.nodes[method_node]
        method_key = node.method_key
        evidence.append(
            Evidence(
                kind="method",
                source=str(behavior),
                target=str(method_node),
                weight=g.edge_weight(behavior, method_node),
                total=g.out_weight_total(behavior),
            )
        )

    return Selection(behavior=behavior, method_key=method_key, evidence=evidence, fallback_used=fallback)


def impute_gap(
    g: KnowledgeGraph,
    registry: MethodRegistry,
    ctx: GapContext,
    target_interval_s: float = DEFAULT_TARGET_INTERVAL_S,
) -> ImputedSegment:
    """Reconstruct a gap: select a method, resample, and run the filler.

    When the estimated behavior is stationary the stationary filler is
    forced regardless of the method ranking; the override is recorded in
    the evidence trail.
    """
    selection = estimate_and_select(g, ctx)
    method_key = selection.method_key
    if selection.behavior == behavior_node_id(STATIONARY.name) and method_key != "stationary":
        method_key = "stationary"
        selection.evidence.append(
            Evidence(
                kind="override",
                source=str(selection.behavior),
                target=str(method_node_id("stationary")),
                weight=0,
                total=0,
                note="stationary behavior forces the stationary filler",
            )
        )

    spec = registry.get(method_key)
    times = resample_times(ctx.gap, target_interval_s)
    points = spec.filler(ctx.gap, times, ctx.fill_context)

    template = ctx.gap.before
    interior = [
        AisRecord(
            vessel_id=template.vessel_id,
            timestamp=p.timestamp,
            lat=p.lat,
            lon=p.lon,
            sog=p.sog,
            cog=p.cog,
            nav_status=template.nav_status,
            vessel_type=template.vessel_type,
            length_m=template.length_m,
            width_m=template.width_m,
            draught_m=template.draught_m,
            cargo_type=template.cargo_type,
        )
        for p in points
    ]

    return ImputedSegment(
        segment_id=f"{ctx.gap.vessel_id}-{ctx.gap.before.epoch_s}-imputed",
        vessel_id=ctx.gap.vessel_id,
        records=[ctx.gap.before, *interior, ctx.gap.after],
        provenance="imputed",
        behavior_id=str(selection.behavior),
        method_key=method_key,
        evidence=selection.evidence,
        fallback_used=selection.fallback_used,
    )


# --- masked-interior benchmarking ---------------------------------------------


@dataclass
class BenchmarkResult:
    best_method_key: str
    mean_error_m: dict[str, float]


def benchmark(seg: Segment, registry: MethodRegistry) -> BenchmarkResult:
    """Score every filler on a complete segment by masking its interior.

    The first two and last two records stay as context; every filler
    reconstructs the masked records at their true timestamps and is
    scored by mean haversine error. Lowest error wins; ties break
    ascending by method key.
    """
    records = seg.records
    if len(records) < 5:
        raise TooShort(f"benchmark needs >= 5 records, got {len(records)}")

    masked = records[2:-2]
    times = [r.timestamp for r in masked]
    pseudo_gap = Gap(
        gap_id=f"{seg.segment_id}-mask",
        vessel_id=seg.vessel_id,
        before=records[1],
        after=records[-2],
    )
    span = pseudo_gap.dt_s
    fill_ctx = FillContext(
        p0=scaled_control_point(records[1], records[0], span),
        p3=scaled_control_point(records[-2], records[-1], span),
    )

    mean_error: dict[str, float] = {}
    for spec in registry:
        points = spec.filler(pseudo_gap, times, fill_ctx)
        errors = [
            haversine_m(p.lat, p.lon, truth.lat, truth.lon)
            for p, truth in zip(points, masked)
        ]
        mean_error[spec.key] = sum(errors) / len(errors)

    best = min(mean_error, key=lambda key: (mean_error[key], key))
    return BenchmarkResult(best_method_key=best, mean_error_m=mean_error)
