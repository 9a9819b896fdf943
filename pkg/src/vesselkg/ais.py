"""AIS record parsing, validation, deduplication, and trajectory segmentation.

Raw delimited AIS rows are parsed into :class:`AisRecord` values through a
configurable column mapping (defaults follow the Danish Maritime Authority
open-data CSV layout), grouped into per-vessel :class:`Trajectory` objects
with anomaly guards applied, and split into bounded-duration
:class:`Segment` pieces with observation :class:`Gap` detection.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .documents import format_timestamp, parse_timestamp
from .geo import implied_speed_kn

logger = logging.getLogger(__name__)

# Config defaults; every one of these is overridable per job.
DEFAULT_GAP_THRESHOLD_S = 900
DEFAULT_MAX_SEGMENT_DURATION_S = 6 * 3600
DEFAULT_V_MAX_KN = 60.0

# AIS wire sentinels meaning "not available"; normalized to absent at parse time.
HEADING_UNAVAILABLE = 511.0
COG_UNAVAILABLE = 360.0

UNKNOWN = "Unknown"


@dataclass(frozen=True)
class AisRecord:
    """One vessel state observation. Absent fields are None, never sentinels."""

    vessel_id: int
    timestamp: datetime
    lat: float
    lon: float
    sog: float | None = None
    cog: float | None = None
    heading: float | None = None
    nav_status: str = UNKNOWN
    vessel_type: str = UNKNOWN
    length_m: float | None = None
    width_m: float | None = None
    draught_m: float | None = None
    cargo_type: str | None = None

    @property
    def epoch_s(self) -> int:
        return int(self.timestamp.timestamp())


@dataclass(frozen=True)
class ParseFailure:
    """A rejected input row; counted per reason, never aborts the ingest."""

    reason: str
    detail: str = ""


@dataclass
class Trajectory:
    """Time-ordered observations of one vessel (strictly increasing timestamps)."""

    vessel_id: int
    records: list[AisRecord]


@dataclass
class Segment:
    """A contiguous bounded-duration piece of one vessel's trajectory."""

    segment_id: str
    vessel_id: int
    records: list[AisRecord]
    provenance: str = "raw"
    behavior_id: str | None = None

    @property
    def duration_s(self) -> int:
        return self.records[-1].epoch_s - self.records[0].epoch_s

    @property
    def eligible_for_behavior(self) -> bool:
        return len(self.records) >= 2

    @property
    def start(self) -> AisRecord:
        return self.records[0]

    @property
    def end(self) -> AisRecord:
        return self.records[-1]


@dataclass
class Gap:
    """An observation hole between two consecutive records of one vessel."""

    gap_id: str
    vessel_id: int
    before: AisRecord
    after: AisRecord

    @property
    def dt_s(self) -> int:
        return self.after.epoch_s - self.before.epoch_s


@dataclass(frozen=True)
class ColumnMapping:
    """Column index per attribute; None means the attribute is not in the source."""

    timestamp: int | None = 0
    mmsi: int | None = 2
    lat: int | None = 3
    lon: int | None = 4
    nav_status: int | None = 5
    sog: int | None = 7
    cog: int | None = 8
    heading: int | None = 9
    vessel_type: int | None = 10
    cargo_type: int | None = 11
    width_m: int | None = 12
    length_m: int | None = 13
    draught_m: int | None = 14
    delimiter: str = ","

    @classmethod
    def from_file(cls, path: str | Path) -> "ColumnMapping":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown column mapping fields: {sorted(unknown)}")
        return cls(**data)


def _cell(fields: Sequence[str], index: int | None) -> str:
    if index is None or index >= len(fields):
        return ""
    return fields[index].strip()


def _opt_float(text: str) -> float | None:
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        return None


def parse_record(
    line: str | Sequence[str], mapping: ColumnMapping | None = None
) -> AisRecord | ParseFailure:
    """Parse one delimited row into a validated AisRecord.

    Kinematic sentinels (heading 511, cog 360) and empty cells become
    absent; out-of-range kinematics are treated as absent rather than
    failing the row. Only identity, timestamp, and coordinates reject
    the row.
    """
    mapping = mapping or ColumnMapping()
    if isinstance(line, str):
        try:
            fields = next(csv.reader(io.StringIO(line), delimiter=mapping.delimiter))
        except StopIteration:
            return ParseFailure("empty_row")
    else:
        fields = list(line)

    mmsi_text = _cell(fields, mapping.mmsi)
    if not mmsi_text.isdigit() or not 1 <= len(mmsi_text) <= 9:
        return ParseFailure("bad_mmsi", mmsi_text)
    vessel_id = int(mmsi_text)

    try:
        timestamp = parse_timestamp(_cell(fields, mapping.timestamp))
    except ValueError:
        return ParseFailure("bad_timestamp", _cell(fields, mapping.timestamp))

    lat = _opt_float(_cell(fields, mapping.lat))
    lon = _opt_float(_cell(fields, mapping.lon))
    if lat is None or lon is None or not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
        return ParseFailure("bad_coordinates", f"lat={lat} lon={lon}")

    sog = _opt_float(_cell(fields, mapping.sog))
    if sog is not None and sog < 0:
        sog = None

    cog = _opt_float(_cell(fields, mapping.cog))
    if cog is not None and not 0.0 <= cog < COG_UNAVAILABLE:
        cog = None

    heading = _opt_float(_cell(fields, mapping.heading))
    if heading is not None and (heading == HEADING_UNAVAILABLE or not 0.0 <= heading < 360.0):
        heading = None

    def _nonneg(text: str) -> float | None:
        value = _opt_float(text)
        return value if value is not None and value >= 0 else None

    return AisRecord(
        vessel_id=vessel_id,
        timestamp=timestamp,
        lat=lat,
        lon=lon,
        sog=sog,
        cog=cog,
        heading=heading,
        nav_status=_cell(fields, mapping.nav_status) or UNKNOWN,
        vessel_type=_cell(fields, mapping.vessel_type) or UNKNOWN,
        length_m=_nonneg(_cell(fields, mapping.length_m)),
        width_m=_nonneg(_cell(fields, mapping.width_m)),
        draught_m=_nonneg(_cell(fields, mapping.draught_m)),
        cargo_type=_cell(fields, mapping.cargo_type) or None,
    )


def iter_records(
    path: str | Path,
    mapping: ColumnMapping | None = None,
    failures: Counter | None = None,
) -> Iterator[AisRecord]:
    """Stream parsed records from a delimited file, counting failures by reason.

    An optional header row is detected by attempting to parse the first
    row; if it fails on timestamp or MMSI it is skipped silently.
    """
    mapping = mapping or ColumnMapping()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=mapping.delimiter)
        for row_no, row in enumerate(reader):
            if not row:
                continue
            result = parse_record(row, mapping)
            if isinstance(result, ParseFailure):
                if row_no == 0 and result.reason in ("bad_mmsi", "bad_timestamp"):
                    continue  # header row
                if failures is not None:
                    failures[result.reason] += 1
                continue
            yield result


def guard_record(r: AisRecord, prev: AisRecord | None, v_max_kn: float = DEFAULT_V_MAX_KN) -> str | None:
    """Anomaly guard for one record against the previous kept record.

    Returns a drop reason ("duplicate_timestamp" or "excessive_speed"),
    or None to keep. The first record of a vessel (prev is None) is
    always kept.
    """
    if prev is None:
        return None
    dt = r.epoch_s - prev.epoch_s
    if dt == 0:
        return "duplicate_timestamp"
    speed = implied_speed_kn(prev.lat, prev.lon, r.lat, r.lon, dt)
    if speed > v_max_kn:
        return "excessive_speed"
    return None


@dataclass
class AssembleResult:
    trajectories: list[Trajectory]
    dropped: Counter


def assemble(records: Iterable[AisRecord], v_max_kn: float = DEFAULT_V_MAX_KN) -> AssembleResult:
    """Group records by vessel, sort by time, dedupe and guard.

    Output is independent of input order up to the first-survivor rule
    on duplicate (vessel_id, timestamp) keys: the earliest occurrence in
    input order wins. Trajectories are returned in ascending vessel_id
    order with strictly increasing timestamps.
    """
    by_vessel: dict[int, list[tuple[int, AisRecord]]] = {}
    for order, record in enumerate(records):
        by_vessel.setdefault(record.vessel_id, []).append((order, record))

    dropped: Counter = Counter()
    trajectories = []
    for vessel_id in sorted(by_vessel):
        indexed = sorted(by_vessel[vessel_id], key=lambda pair: (pair[1].epoch_s, pair[0]))
        kept: list[AisRecord] = []
        for _, record in indexed:
            reason = guard_record(record, kept[-1] if kept else None, v_max_kn)
            if reason is None:
                kept.append(record)
            else:
                dropped[reason] += 1
        if kept:
            trajectories.append(Trajectory(vessel_id=vessel_id, records=kept))
    return AssembleResult(trajectories=trajectories, dropped=dropped)


def segment_trajectory(
    traj: Trajectory,
    gap_threshold_s: int = DEFAULT_GAP_THRESHOLD_S,
    max_segment_duration_s: int = DEFAULT_MAX_SEGMENT_DURATION_S,
) -> tuple[list[Segment], list[Gap]]:
    """Split a trajectory into raw segments and detected gaps.

    A split happens at every consecutive pair with dt > gap_threshold_s
    (emitting a Gap), and greedily whenever a segment would exceed
    max_segment_duration_s (no Gap emitted). Every record lands in
    exactly one segment; sub-2-record segments are retained but are
    ineligible for behavior abstraction.
    """
    if gap_threshold_s <= 0:
        raise ValueError("gap_threshold_s must be positive")
    if max_segment_duration_s < gap_threshold_s:
        raise ValueError("max_segment_duration_s must be >= gap_threshold_s")

    segments: list[Segment] = []
    gaps: list[Gap] = []
    current: list[AisRecord] = []

    def close() -> None:
        if current:
            first = current[0]
            segments.append(
                Segment(
                    segment_id=f"{traj.vessel_id}-{first.epoch_s}-raw",
                    vessel_id=traj.vessel_id,
                    records=list(current),
                )
            )
            current.clear()

    for record in traj.records:
        if current:
            dt = record.epoch_s - current[-1].epoch_s
            if dt > gap_threshold_s:
                gaps.append(
                    Gap(
                        gap_id=f"{traj.vessel_id}-{current[-1].epoch_s}-gap",
                        vessel_id=traj.vessel_id,
                        before=current[-1],
                        after=record,
                    )
                )
                close()
            elif record.epoch_s - current[0].epoch_s > max_segment_duration_s:
                close()
        current.append(record)
    close()
    return segments, gaps


def max_internal_speed_kn(seg: Segment) -> float:
    """Largest implied speed between consecutive records of a segment."""
    top = 0.0
    for prev, cur in zip(seg.records, seg.records[1:]):
        top = max(
            top,
            implied_speed_kn(prev.lat, prev.lon, cur.lat, cur.lon, cur.epoch_s - prev.epoch_s),
        )
    return top


def median_sampling_interval_s(records: Sequence[AisRecord]) -> int | None:
    """Median dt between consecutive records; None for fewer than 2 records."""
    deltas = sorted(b.epoch_s - a.epoch_s for a, b in zip(records, records[1:]))
    if not deltas:
        return None
    return deltas[len(deltas) // 2]


def filter_time_window(
    records: Iterable[AisRecord], window: tuple[str, str] | None
) -> Iterator[AisRecord]:
    """Keep records whose UTC time-of-day falls in [start, end).

    The window is given as "HH:MM" strings; start > end wraps across
    midnight. None keeps everything.
    """
    if window is None:
        yield from records
        return
    start = _parse_hhmm(window[0])
    end = _parse_hhmm(window[1])
    for record in records:
        tod = record.timestamp.hour * 60 + record.timestamp.minute
        inside = start <= tod < end if start <= end else tod >= start or tod < end
        if inside:
            yield record


def _parse_hhmm(text: str) -> int:
    hours, minutes = text.strip().split(":")
    return int(hours) * 60 + int(minutes)


# --- canonical document (de)serialization ---------------------------------

_OPTIONAL_FIELDS = ("sog", "cog", "heading", "length_m", "width_m", "draught_m", "cargo_type")


def record_to_doc(record: AisRecord) -> dict:
    doc = {
        "vessel_id": record.vessel_id,
        "timestamp": format_timestamp(record.timestamp),
        "lat": record.lat,
        "lon": record.lon,
        "nav_status": record.nav_status,
        "vessel_type": record.vessel_type,
    }
    for name in _OPTIONAL_FIELDS:
        value = getattr(record, name)
        if value is not None:
            doc[name] = value
    return doc


def record_from_doc(doc: dict) -> AisRecord:
    return AisRecord(
        vessel_id=int(doc["vessel_id"]),
        timestamp=parse_timestamp(doc["timestamp"]),
        lat=float(doc["lat"]),
        lon=float(doc["lon"]),
        nav_status=doc.get("nav_status", UNKNOWN),
        vessel_type=doc.get("vessel_type", UNKNOWN),
        **{name: doc.get(name) for name in _OPTIONAL_FIELDS},
    )
