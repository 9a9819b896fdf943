"""Behavior abstraction: segment features and rule-based pattern classification.

A segment's motion signals are compressed into :class:`SegmentFeatures`
and classified into a small fixed taxonomy of behavior patterns by a
deterministic priority-ordered rule set. The classifier sits behind the
:class:`Abstractor` interface so alternative implementations can be
plugged in without touching the pipeline.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean, pstdev
from typing import Protocol

from .ais import AisRecord, Segment
from .geo import angle_diff_deg, haversine_m

logger = logging.getLogger(__name__)

OPEN_SEA = "open-sea"


class TooShort(ValueError):
    """Segment has fewer than 2 records; no features can be extracted."""


class AbstractionFailure(RuntimeError):
    """An abstractor implementation could not produce a pattern."""


@dataclass(frozen=True)
class BehaviorPattern:
    """A named characterization of segment motion."""

    name: str
    description: str


# Fixed taxonomy; rule thresholds live in RuleConfig so they can be tuned
# per deployment without code changes. Descriptions cover speed, course,
# heading, intent, and duration.
STATIONARY = BehaviorPattern(
    "Stationary: Hold Position",
    "Speed near zero; course and heading stable or undefined; the vessel holds "
    "position while moored, anchored, or waiting; lasts minutes to days.",
)
PORT_ENTRY = BehaviorPattern(
    "Port-Entry: Decelerate–Align",
    "Speed falls markedly on approach; course and heading align toward the harbor "
    "entrance; intent is arrival and berthing; typically tens of minutes.",
)
PORT_EXIT = BehaviorPattern(
    "Port-Exit: Accelerate–Depart",
    "Speed builds from harbor maneuvering to cruise; course and heading swing from "
    "the berth toward open water; intent is departure; typically tens of minutes.",
)
TRANSIT = BehaviorPattern(
    "Transit: Steady Course",
    "Sustained cruising speed; near-constant course and heading on a straight "
    "track; intent is passage between areas; typically hours.",
)
MANEUVER = BehaviorPattern(
    "Maneuver: Course Change",
    "Moderate, varying speed; large accumulated course change; intent is turning, "
    "crossing traffic, or working confined waters; minutes to an hour.",
)
DRIFT = BehaviorPattern(
    "Drift: Slow Irregular",
    "Low, irregular speed; wandering course and heading; intent unclear (drifting, "
    "loitering, or fishing); duration varies.",
)

PATTERNS = (STATIONARY, PORT_ENTRY, PORT_EXIT, TRANSIT, MANEUVER, DRIFT)


@dataclass(frozen=True)
class Port:
    name: str
    lat: float
    lon: float
    radius_m: float


@dataclass
class PortDirectory:
    """Known ports used for spatial context; may be empty."""

    ports: list[Port] = field(default_factory=list)

    @classmethod
    def from_file(cls, path: str | Path) -> "PortDirectory":
        """Load from a delimited file with columns name,lat,lon,radius_m."""
        ports = []
        with open(path, newline="", encoding="utf-8") as handle:
            for row in csv.reader(handle):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    ports.append(
                        Port(row[0].strip(), float(row[1]), float(row[2]), float(row[3]))
                    )
                except (IndexError, ValueError):
                    continue  # header or malformed row
        return cls(ports=ports)

    def nearest(self, lat: float, lon: float) -> tuple[Port, float] | None:
        """Nearest port and its distance in meters; None when the directory is empty."""
        best: tuple[Port, float] | None = None
        for port in self.ports:
            dist = haversine_m(lat, lon, port.lat, port.lon)
            if best is None or dist < best[1] or (dist == best[1] and port.name < best[0].name):
                best = (port, dist)
        return best


@dataclass(frozen=True)
class RuleConfig:
    """Classifier thresholds, overridable via a key-value config file."""

    stationary_max_sog_kn: float = 0.5
    port_sog_delta_kn: float = 3.0
    transit_min_straightness: float = 0.95
    transit_max_sog_std_kn: float = 1.5
    transit_min_sog_kn: float = 4.0
    maneuver_min_course_change_deg: float = 45.0

    @classmethod
    def from_file(cls, path: str | Path) -> "RuleConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown rule config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass
class SegmentFeatures:
    """Kinematic and contextual aggregates of one segment.

    Speed and course aggregates skip absent values and are None when no
    value was present at all. Port fields are None when the directory
    is empty.
    """

    mean_sog: float | None
    start_sog: float | None
    end_sog: float | None
    sog_std: float | None
    total_course_change: float
    net_displacement_m: float
    path_length_m: float
    straightness: float
    dist_start_to_port_m: float | None
    dist_end_to_port_m: float | None
    start_port: Port | None
    end_port: Port | None
    modal_nav_status: str
    modal_vessel_type: str
    duration_s: int


def _modal(values: list[str]) -> str:
    counts: dict[str, int] = {}
    for value in values:
        counts[value] = counts.get(value, 0) + 1
    return min(counts, key=lambda v: (-counts[v], v))


def extract_features(seg: Segment, ports: PortDirectory) -> SegmentFeatures:
    """Compute SegmentFeatures from a segment's records alone."""
    records = seg.records
    if len(records) < 2:
        raise TooShort(f"segment {seg.segment_id} has {len(records)} record(s)")

    sogs = [r.sog for r in records if r.sog is not None]
    cogs = [r.cog for r in records if r.cog is not None]

    total_course_change = sum(
        abs(angle_diff_deg(a, b)) for a, b in zip(cogs, cogs[1:])
    )
    path_length = sum(
        haversine_m(a.lat, a.lon, b.lat, b.lon) for a, b in zip(records, records[1:])
    )
    net = haversine_m(records[0].lat, records[0].lon, records[-1].lat, records[-1].lon)
    straightness = 1.0 if path_length == 0 else min(1.0, net / path_length)

    start_hit = ports.nearest(records[0].lat, records[0].lon)
    end_hit = ports.nearest(records[-1].lat, records[-1].lon)

    return SegmentFeatures(
        mean_sog=fmean(sogs) if sogs else None,
        start_sog=sogs[0] if sogs else None,
        end_sog=sogs[-1] if sogs else None,
        sog_std=(pstdev(sogs) if len(sogs) >= 2 else 0.0) if sogs else None,
        total_course_change=total_course_change,
        net_displacement_m=net,
        path_length_m=path_length,
        straightness=straightness,
        dist_start_to_port_m=start_hit[1] if start_hit else None,
        dist_end_to_port_m=end_hit[1] if end_hit else None,
        start_port=start_hit[0] if start_hit else None,
        end_port=end_hit[0] if end_hit else None,
        modal_nav_status=_modal([r.nav_status for r in records]),
        modal_vessel_type=_modal([r.vessel_type for r in records]),
        duration_s=seg.duration_s,
    )


def classify(f: SegmentFeatures, rules: RuleConfig | None = None) -> BehaviorPattern:
    """Classify features into a pattern; first matching rule wins, total.

    Rules that compare an absent (None) aggregate simply do not fire;
    the final Drift rule catches everything else.
    """
    r = rules or RuleConfig()

    if f.mean_sog is not None and f.mean_sog < r.stationary_max_sog_kn:
        return STATIONARY
    if (
        f.end_port is not None
        and f.dist_end_to_port_m is not None
        and f.dist_end_to_port_m < f.end_port.radius_m
        and f.start_sog is not None
        and f.end_sog is not None
        and f.start_sog - f.end_sog >= r.port_sog_delta_kn
    ):
        return PORT_ENTRY
    if (
        f.start_port is not None
        and f.dist_start_to_port_m is not None
        and f.dist_start_to_port_m < f.start_port.radius_m
        and f.start_sog is not None
        and f.end_sog is not None
        and f.end_sog - f.start_sog >= r.port_sog_delta_kn
    ):
        return PORT_EXIT
    if (
        f.straightness >= r.transit_min_straightness
        and f.sog_std is not None
        and f.sog_std <= r.transit_max_sog_std_kn
        and f.mean_sog is not None
        and f.mean_sog >= r.transit_min_sog_kn
    ):
        return TRANSIT
    if f.total_course_change >= r.maneuver_min_course_change_deg:
        return MANEUVER
    return DRIFT


def spatial_context(positions: list[tuple[float, float]], ports: PortDirectory) -> str:
    """Spatial-context label for a list of positions checked in order.

    The first position lying inside its nearest port's radius wins
    ("near-port:<name>"); otherwise "open-sea".
    """
    for lat, lon in positions:
        hit = ports.nearest(lat, lon)
        if hit is not None and hit[1] < hit[0].radius_m:
            return f"near-port:{hit[0].name}"
    return OPEN_SEA


def segment_static_attrs(
    records: list[AisRecord], ports: PortDirectory
) -> set[tuple[str, str]]:
    """(attr_class, display) pairs a segment contributes to the graph.

    Modal vessel type and navigation status over the records plus one
    spatial context. The same derivation backs graph construction and
    report composition, so cited nodes always resolve.
    """
    attrs = {
        ("vessel_type", _modal([r.vessel_type for r in records])),
        ("nav_status", _modal([r.nav_status for r in records])),
        ("spatial_context", spatial_context([(r.lat, r.lon) for r in records], ports)),
    }
    return attrs


def gap_static_attrs(
    before: AisRecord, after: AisRecord, ports: PortDirectory
) -> set[tuple[str, str]]:
    """(attr_class, display) pairs describing a gap's surroundings.

    Endpoint vessel types and navigation statuses (deduplicated), plus
    one spatial context checked arrival-side first: a gap that ends
    inside a port area reads as near-port even if it started at sea.
    """
    attrs = {
        ("vessel_type", before.vessel_type),
        ("vessel_type", after.vessel_type),
        ("nav_status", before.nav_status),
        ("nav_status", after.nav_status),
        (
            "spatial_context",
            spatial_context([(after.lat, after.lon), (before.lat, before.lon)], ports),
        ),
    }
    return attrs


class Abstractor(Protocol):
    """Pluggable behavior abstraction; implementations must be pure
    given (segment, ports) or explicitly declare nondeterminism."""

    def abstract(self, seg: Segment, ports: PortDirectory) -> BehaviorPattern: ...


@dataclass
class RuleBasedAbstractor:
    """Default abstractor: extract_features + classify."""

    rules: RuleConfig = field(default_factory=RuleConfig)

    def abstract(self, seg: Segment, ports: PortDirectory) -> BehaviorPattern:
        try:
            return classify(extract_features(seg, ports), self.rules)
        except TooShort as exc:
            raise AbstractionFailure(str(exc)) from exc
