"""Segment and node analysis reports.

Renders the reasoning behind a segment's behavior label and (for
imputed segments) its method choice into plain text with three stable
sections: CUES (the numeric inputs the rules and estimators saw),
RATIONALE (a fixed sentence per behavior pattern), and EVIDENCE (the
graph edges behind the choice, with exact weights and shares). Output
is byte-deterministic so reports can be diffed and cached.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .ais import Segment
from .behavior import (
    PATTERNS,
    PortDirectory,
    TooShort,
    extract_features,
    gap_static_attrs,
    segment_static_attrs,
)
from .documents import SCHEMA_VERSION, format_timestamp
from .graph import (
    KnowledgeGraph,
    NodeId,
    UnknownNode,
    canonical_key,
    method_node_id,
    node_display,
    static_attr_id,
)
from .imputation import Evidence, ImputedSegment

logger = logging.getLogger(__name__)

FALLBACK_MARKER = "fallback: no SD-KG evidence"

_PATTERN_BY_KEY = {canonical_key(p.name): p for p in PATTERNS}

_RATIONALE = {
    "Stationary: Hold Position": (
        "The vessel held position at negligible speed, consistent with being "
        "moored, anchored, or waiting."
    ),
    "Port-Entry: Decelerate–Align": (
        "The vessel shed speed while closing on a port area, consistent with an "
        "arrival approach and berthing intent."
    ),
    "Port-Exit: Accelerate–Depart": (
        "The vessel built up speed while leaving a port area, consistent with "
        "departure toward open water."
    ),
    "Transit: Steady Course": (
        "The vessel kept a steady speed on a near-straight track, consistent "
        "with passage between areas."
    ),
    "Maneuver: Course Change": (
        "The vessel accumulated a large course change, consistent with turning, "
        "crossing traffic, or working confined waters."
    ),
    "Drift: Slow Irregular": (
        "The vessel moved slowly without a sustained course, consistent with "
        "drifting, loitering, or fishing."
    ),
}

_METHOD_DISPLAY = {
    "linear": "Linear Filler",
    "smooth_curve": "Smooth Curve Filler",
    "stationary": "Stationary Filler",
}


def format_share_percent(weight: int, total: int) -> str:
    """weight/total as a percentage with exactly 2 decimals, half-up.

    Computed in exact integer arithmetic so formatting never drifts from
    the stored counts.
    """
    if total <= 0:
        return "0.00"
    hundredths, remainder = divmod(weight * 10000, total)
    if 2 * remainder >= total:
        hundredths += 1
    return f"{hundredths // 100}.{hundredths % 100:02d}"


@dataclass
class SegmentReport:
    """The knowledge-centric analysis artifact for one segment."""

    segment_id: str
    provenance: str
    static_attributes: list[tuple[str, str, str]]  # (attr_class, display, node id)
    behavior_context: dict[str, str | None]  # prev / current / next
    explanation: str
    method: str | None
    evidence: list[Evidence]
    fallback_used: bool
    subgraph: dict
    navigation: list[str]

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "segment_report",
            "segment_id": self.segment_id,
            "provenance": self.provenance,
            "static_attributes": [
                {"attr_class": c, "display": d, "node": n}
                for c, d, n in self.static_attributes
            ],
            "behavior_context": dict(self.behavior_context),
            "explanation": self.explanation,
            "method": self.method,
            "evidence": [ev.to_doc() for ev in self.evidence],
            "fallback_used": self.fallback_used,
            "subgraph": self.subgraph,
            "navigation": list(self.navigation),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SegmentReport":
        return cls(
            segment_id=doc["segment_id"],
            provenance=doc["provenance"],
            static_attributes=[
                (e["attr_class"], e["display"], e["node"])
                for e in doc["static_attributes"]
            ],
            behavior_context=dict(doc["behavior_context"]),
            explanation=doc["explanation"],
            method=doc.get("method"),
            evidence=[Evidence.from_doc(e) for e in doc.get("evidence", [])],
            fallback_used=bool(doc.get("fallback_used", False)),
            subgraph=doc["subgraph"],
            navigation=list(doc.get("navigation", [])),
        )


@dataclass
class NodeReport:
    """A node's statistics plus its weighted neighborhood."""

    node: dict
    neighbors: list[dict]
    navigation: list[str] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "node_report",
            "node": dict(self.node),
            "neighbors": [dict(n) for n in self.neighbors],
            "navigation": list(self.navigation),
        }


def _display_for(g: KnowledgeGraph, node_id: NodeId) -> str:
    node = g.nodes.get(node_id)
    if node is not None:
        return node_display(node)
    if node_id.kind == "behavior" and node_id.key in _PATTERN_BY_KEY:
        return _PATTERN_BY_KEY[node_id.key].name
    if node_id.kind == "method":
        return _METHOD_DISPLAY.get(node_id.key, node_id.key)
    return node_id.key


def render_evidence_line(ev: Evidence, g: KnowledgeGraph) -> str:
    if ev.kind == "override":
        return f"override: {ev.note}"
    source = _display_for(g, NodeId.parse(ev.source))
    target = _display_for(g, NodeId.parse(ev.target))
    pct = format_share_percent(ev.weight, ev.total)
    if ev.kind == "attribute":
        return f"{source} → {target}: {ev.weight} of {ev.total} segments ({pct}%)"
    if ev.kind == "transition":
        return f"{source} → {target}: {ev.weight} of {ev.total} transitions ({pct}%)"
    return f"{source} → {target}: {ev.weight} of {ev.total} ({pct}%)"


def _km(meters: float) -> str:
    return f"{meters / 1000:.1f} km"


def _raw_cues(seg: Segment, ports: PortDirectory) -> list[str]:
    try:
        f = extract_features(seg, ports)
    except TooShort:
        return [f"{len(seg.records)} record(s); too short for feature extraction"]

    cues = [f"{len(seg.records)} records spanning {f.duration_s} s"]
    if f.mean_sog is not None:
        std = f" (std {f.sog_std:.2f} kn)" if f.sog_std is not None else ""
        cues.append(f"mean speed {f.mean_sog:.2f} kn{std}")
    if f.start_sog is not None and f.end_sog is not None and f.start_sog != f.end_sog:
        verb = "fell" if f.end_sog < f.start_sog else "rose"
        cues.append(f"speed {verb} from {f.start_sog:.2f} kn to {f.end_sog:.2f} kn")
    cues.append(f"total course change {f.total_course_change:.1f}°")
    cues.append(f"straightness {f.straightness:.3f} over a {f.path_length_m:.0f} m path")
    if f.start_port is not None and f.dist_start_to_port_m is not None:
        cues.append(f"started {_km(f.dist_start_to_port_m)} from port {f.start_port.name}")
    if f.end_port is not None and f.dist_end_to_port_m is not None:
        cues.append(f"ended {_km(f.dist_end_to_port_m)} from port {f.end_port.name}")
    return cues


def _imputed_cues(seg: ImputedSegment, attrs: list[tuple[str, str, str]], g: KnowledgeGraph) -> list[str]:
    before, after = seg.records[0], seg.records[-1]
    dt = int((after.timestamp - before.timestamp).total_seconds())
    cues = [
        f"gap of {dt} s between {format_timestamp(before.timestamp)} "
        f"and {format_timestamp(after.timestamp)}",
        f"reconstructed {len(seg.records) - 2} interior point(s) with "
        f"{_display_for(g, method_node_id(seg.method_key))}",
    ]
    context = "; ".join(f"{c}={d}" for c, d, _ in attrs)
    cues.append(f"context: {context}")
    return cues


def _resolve_behavior(
    g: KnowledgeGraph, behavior_id: str | None, tolerate_missing: bool
) -> tuple[NodeId | None, str | None]:
    """(node id if it resolves in g, display name) for a stored behavior reference."""
    if behavior_id is None:
        return None, None
    node_id = NodeId.parse(behavior_id)
    if node_id in g.nodes:
        return node_id, node_display(g.nodes[node_id])
    if tolerate_missing and node_id.key in _PATTERN_BY_KEY:
        return None, _PATTERN_BY_KEY[node_id.key].name
    raise UnknownNode(behavior_id)


def compose(
    seg: Segment,
    g: KnowledgeGraph,
    prev_seg: Segment | None = None,
    next_seg: Segment | None = None,
    ports: PortDirectory | None = None,
) -> SegmentReport:
    """Build the analysis report for a raw or imputed segment.

    `ports` must be the directory used during processing so the derived
    attribute nodes resolve in `g`. Raises UnknownNode when the segment
    cites a behavior the graph does not contain (fallback imputations
    are exempt: their references may predate any graph evidence).
    """
    ports = ports or PortDirectory()
    imputed = seg.provenance == "imputed"
    fallback = bool(getattr(seg, "fallback_used", False))

    if imputed:
        raw_attrs = gap_static_attrs(seg.records[0], seg.records[-1], ports)
    else:
        raw_attrs = segment_static_attrs(seg.records, ports)
    static_attributes = []
    for attr_class, display in sorted(raw_attrs):
        attr_id = static_attr_id(attr_class, display)
        node = g.nodes.get(attr_id)
        if node is not None:
            static_attributes.append((attr_class, node_display(node), str(attr_id)))

    behavior_id, behavior_name = _resolve_behavior(g, seg.behavior_id, tolerate_missing=fallback)
    prev_id, prev_name = _resolve_behavior(
        g, prev_seg.behavior_id if prev_seg else None, tolerate_missing=True
    )
    next_id, _ = _resolve_behavior(
        g, next_seg.behavior_id if next_seg else None, tolerate_missing=True
    )

    method_ref: str | None = None
    if imputed:
        method_ref = str(method_node_id(seg.method_key))

    # CUES
    if imputed:
        cues = _imputed_cues(seg, static_attributes, g)
        if prev_name is not None:
            cues.append(f"previous behavior {prev_name}")
    else:
        cues = _raw_cues(seg, ports)

    # RATIONALE
    if behavior_name is None:
        rationale = "No behavior was classified: the segment is too short for feature extraction."
    else:
        lines = [_RATIONALE.get(behavior_name, f"Pattern {behavior_name}.")]
        vessel_type = next((d for c, d, _ in static_attributes if c == "vessel_type"), None)
        nav_status = next((d for c, d, _ in static_attributes if c == "nav_status"), None)
        if vessel_type and nav_status:
            verb = "estimated" if imputed else "classified"
            lines.append(
                f"{behavior_name} {verb} for a {vessel_type} vessel "
                f"in the status {nav_status}."
            )
        if imputed and fallback:
            lines.append(
                "No graph evidence matched the gap context; the default pattern "
                "and method were applied."
            )
        rationale = " ".join(lines)

    # EVIDENCE
    if imputed:
        evidence = list(seg.evidence)
    else:
        evidence = []
        if behavior_id is not None:
            for _, _, node_ref in static_attributes:
                attr_id = NodeId.parse(node_ref)
                weight = g.edge_weight(attr_id, behavior_id)
                if weight > 0:
                    evidence.append(
                        Evidence(
                            kind="attribute",
                            source=node_ref,
                            target=str(behavior_id),
                            weight=weight,
                            total=g.out_weight_total(attr_id),
                        )
                    )
    evidence_lines = [render_evidence_line(ev, g) for ev in evidence]
    if imputed and fallback:
        evidence_lines.insert(0, FALLBACK_MARKER)
    if not evidence_lines:
        evidence_lines = ["none"]

    explanation = "\n".join(
        [
            "CUES:",
            *(f"- {line}" for line in cues),
            "RATIONALE:",
            rationale,
            "EVIDENCE:",
            *(f"- {line}" for line in evidence_lines),
        ]
    )

    if behavior_id is not None:
        method_node = method_node_id(seg.method_key) if imputed else None
        if method_node is not None and method_node not in g.nodes:
            method_node = None
        subgraph = g.subgraph_for_segment(
            [(c, d) for c, d, _ in static_attributes], behavior_id, method_node
        )
    else:
        subgraph = {"schema_version": SCHEMA_VERSION, "kind": "subgraph", "nodes": [], "edges": []}

    navigation: list[str] = []
    for ref in (
        *(n for _, _, n in static_attributes),
        str(prev_id) if prev_id else None,
        str(behavior_id) if behavior_id else None,
        str(next_id) if next_id else None,
        method_ref if method_ref and NodeId.parse(method_ref) in g.nodes else None,
    ):
        if ref is not None and ref not in navigation:
            navigation.append(ref)

    return SegmentReport(
        segment_id=seg.segment_id,
        provenance=seg.provenance,
        static_attributes=static_attributes,
        behavior_context={
            "prev": str(prev_id) if prev_id else None,
            "current": str(behavior_id) if behavior_id else None,
            "next": str(next_id) if next_id else None,
        },
        explanation=explanation,
        method=method_ref,
        evidence=evidence,
        fallback_used=fallback,
        subgraph=subgraph,
        navigation=navigation,
    )


def segment_sort_key(seg: Segment) -> tuple:
    """Timeline order for one vessel's segments: raw before the imputed
    segment that starts at its final record."""
    start = seg.records[0].epoch_s if seg.records else 0
    return (start, 0 if seg.provenance == "raw" else 1, seg.segment_id)


def compose_all_reports(
    segments: list[Segment],
    g: KnowledgeGraph,
    ports: PortDirectory | None = None,
) -> dict[str, SegmentReport]:
    """One report per segment; prev/next taken from each vessel's timeline.

    A segment citing a node the graph lacks is skipped with a warning
    rather than failing the batch.
    """
    by_vessel: dict[int, list[Segment]] = {}
    for seg in segments:
        by_vessel.setdefault(seg.vessel_id, []).append(seg)

    reports: dict[str, SegmentReport] = {}
    for vessel_segments in by_vessel.values():
        vessel_segments.sort(key=segment_sort_key)
        for i, seg in enumerate(vessel_segments):
            prev_seg = vessel_segments[i - 1] if i > 0 else None
            next_seg = vessel_segments[i + 1] if i + 1 < len(vessel_segments) else None
            try:
                reports[seg.segment_id] = compose(seg, g, prev_seg, next_seg, ports)
            except UnknownNode:
                logger.warning("segment %s cites unknown nodes; report skipped", seg.segment_id)
    return reports


def report_for_node(node_id: NodeId, g: KnowledgeGraph) -> NodeReport:
    """Describe one node: counts, description, and weighted neighbors.

    Neighbor order matches the graph's neighbor query (heaviest first);
    each entry carries the edge share so method nodes read as "serves
    behavior X in share% of its imputations".
    """
    if node_id not in g.nodes:
        raise UnknownNode(str(node_id))
    node_doc = KnowledgeGraph._node_doc(g.nodes[node_id])

    neighbors = []
    for other, weight in g.neighbors(node_id):
        outgoing = (node_id, other) in g.edges
        source = node_id if outgoing else other
        total = g.out_weight_total(source)
        neighbors.append(
            {
                "node": str(other),
                "display": _display_for(g, other),
                "kind": other.kind,
                "direction": "out" if outgoing else "in",
                "weight": weight,
                "total": total,
                "share_percent": format_share_percent(weight, total),
            }
        )

    return NodeReport(
        node=node_doc,
        neighbors=neighbors,
        navigation=[n["node"] for n in neighbors],
    )
