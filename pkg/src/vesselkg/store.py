"""On-disk persistence: append-only line files per entity class.

One directory holds one consistent snapshot of a job's output:
trajectories, segments (raw and imputed), gaps, reports, the graph,
plus the job config and final status. Everything is stored in the
canonical document format, one document per line for the append-only
entity files, and loaded fully into memory at startup (desk-scale
datasets by design). A :class:`StoreRoot` manages multiple snapshots
with an atomically swapped CURRENT pointer.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable

from .ais import Gap, Segment, Trajectory, record_from_doc, record_to_doc
from .documents import SCHEMA_VERSION, SchemaError, dump_document, load_document
from .explanation import SegmentReport
from .graph import KnowledgeGraph
from .imputation import Evidence, ImputedSegment


def trajectory_to_doc(traj: Trajectory) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "trajectory",
        "vessel_id": traj.vessel_id,
        "records": [record_to_doc(r) for r in traj.records],
    }


def trajectory_from_doc(doc: dict) -> Trajectory:
    return Trajectory(
        vessel_id=int(doc["vessel_id"]),
        records=[record_from_doc(r) for r in doc["records"]],
    )


def segment_to_doc(seg: Segment) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "segment",
        "segment_id": seg.segment_id,
        "vessel_id": seg.vessel_id,
        "provenance": seg.provenance,
        "behavior_id": seg.behavior_id,
        "records": [record_to_doc(r) for r in seg.records],
    }
    if isinstance(seg, ImputedSegment):
        doc["method_key"] = seg.method_key
        doc["evidence"] = [ev.to_doc() for ev in seg.evidence]
        doc["fallback_used"] = seg.fallback_used
    return doc


def segment_from_doc(doc: dict) -> Segment:
    base = {
        "segment_id": doc["segment_id"],
        "vessel_id": int(doc["vessel_id"]),
        "records": [record_from_doc(r) for r in doc["records"]],
        "provenance": doc["provenance"],
        "behavior_id": doc.get("behavior_id"),
    }
    if doc["provenance"] == "imputed":
        return ImputedSegment(
            **base,
            method_key=doc["method_key"],
            evidence=[Evidence.from_doc(e) for e in doc.get("evidence", [])],
            fallback_used=bool(doc.get("fallback_used", False)),
        )
    return Segment(**base)


def gap_to_doc(gap: Gap) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "gap",
        "gap_id": gap.gap_id,
        "vessel_id": gap.vessel_id,
        "before": record_to_doc(gap.before),
        "after": record_to_doc(gap.after),
    }


def gap_from_doc(doc: dict) -> Gap:
    return Gap(
        gap_id=doc["gap_id"],
        vessel_id=int(doc["vessel_id"]),
        before=record_from_doc(doc["before"]),
        after=record_from_doc(doc["after"]),
    )


class Store:
    """One snapshot directory; line files are append-only."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, name: str) -> Path:
        return self.data_dir / name

    # --- line files -----------------------------------------------------

    def _append(self, name: str, docs: Iterable[dict]) -> int:
        count = 0
        with open(self._path(name), "a", encoding="utf-8") as handle:
            for doc in docs:
                handle.write(dump_document(doc) + "\n")
                count += 1
        return count

    def _read_lines(self, name: str) -> list[dict]:
        path = self._path(name)
        if not path.exists():
            return []
        docs = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    docs.append(load_document(line))
        return docs

    def append_trajectories(self, trajectories: Iterable[Trajectory]) -> int:
        return self._append("trajectories.jsonl", (trajectory_to_doc(t) for t in trajectories))

    def read_trajectories(self) -> list[Trajectory]:
        return [trajectory_from_doc(d) for d in self._read_lines("trajectories.jsonl")]

    def append_segments(self, segments: Iterable[Segment]) -> int:
        return self._append("segments.jsonl", (segment_to_doc(s) for s in segments))

    def read_segments(self) -> list[Segment]:
        return [segment_from_doc(d) for d in self._read_lines("segments.jsonl")]

    def append_gaps(self, gaps: Iterable[Gap]) -> int:
        return self._append("gaps.jsonl", (gap_to_doc(g) for g in gaps))

    def read_gaps(self) -> list[Gap]:
        return [gap_from_doc(d) for d in self._read_lines("gaps.jsonl")]

    def append_reports(self, reports: Iterable[SegmentReport]) -> int:
        return self._append("reports.jsonl", (r.to_doc() for r in reports))

    def read_reports(self) -> list[SegmentReport]:
        return [SegmentReport.from_doc(d) for d in self._read_lines("reports.jsonl")]

    # --- single documents --------------------------------------------------

    def _write_atomic(self, name: str, text: str) -> None:
        tmp = self._path(f".{name}.tmp{os.getpid()}")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, self._path(name))

    def write_graph(self, g: KnowledgeGraph) -> None:
        self._write_atomic("graph.json", g.save_text())

    def read_graph(self) -> KnowledgeGraph | None:
        path = self._path("graph.json")
        if not path.exists():
            return None
        return KnowledgeGraph.load_text(path.read_text(encoding="utf-8"))

    def write_job_status(self, doc: dict) -> None:
        self._write_atomic("job.json", dump_document(doc))

    def read_job_status(self) -> dict | None:
        path = self._path("job.json")
        if not path.exists():
            return None
        return load_document(path.read_text(encoding="utf-8"))

    def write_config(self, doc: dict) -> None:
        doc = {"schema_version": SCHEMA_VERSION, "kind": "job_config", **doc}
        self._write_atomic("config.json", dump_document(doc))

    def read_config(self) -> dict | None:
        path = self._path("config.json")
        if not path.exists():
            return None
        doc = load_document(path.read_text(encoding="utf-8"))
        return {k: v for k, v in doc.items() if k not in ("schema_version", "kind")}


class StoreRoot:
    """Snapshot directory manager with an atomically swapped pointer.

    Readers resolve the CURRENT pointer once and keep using that
    snapshot; a completing job writes a fresh snapshot directory and
    then swaps the pointer, so no reader ever observes a half-written
    state.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @property
    def _pointer(self) -> Path:
        return self.root / "CURRENT"

    def new_snapshot(self, name: str) -> Store:
        if not name or "/" in name or name.startswith("."):
            raise ValueError(f"bad snapshot name: {name!r}")
        return Store(self.root / "snapshots" / name)

    def activate(self, name: str) -> None:
        if not (self.root / "snapshots" / name).is_dir():
            raise SchemaError(f"snapshot does not exist: {name}")
        tmp = self.root / f".CURRENT.tmp{os.getpid()}"
        tmp.write_text(name + "\n", encoding="utf-8")
        os.replace(tmp, self._pointer)

    def current(self) -> Store | None:
        """The active snapshot: the pointed-to directory, or the root
        itself when it holds flat store files (CLI layout)."""
        if self._pointer.exists():
            name = self._pointer.read_text(encoding="utf-8").strip()
            path = self.root / "snapshots" / name
            if path.is_dir():
                return Store(path)
        if (self.root / "graph.json").exists() or (self.root / "segments.jsonl").exists():
            return Store(self.root)
        return None
