"""HTTP query service over one immutable store snapshot.

Read endpoints serve trajectories, segments, reports, and the graph
from an in-memory snapshot; a background job (one at a time) builds a
fresh snapshot directory and atomically swaps it in on completion, so
no response ever mixes pre- and post-job data. All request and
response bodies use the canonical document format; unknown request
fields are rejected with a 400.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .ais import Gap, Segment, Trajectory
from .behavior import PortDirectory
from .documents import SCHEMA_VERSION, parse_timestamp
from .explanation import (
    SegmentReport,
    compose_all_reports,
    report_for_node,
    segment_sort_key,
)
from .graph import KINDS, KnowledgeGraph, NodeId, UnknownNode
from .imputation import MethodRegistry
from .store import Store, StoreRoot, segment_to_doc
from .workflow import (
    JobConfig,
    JobFailed,
    JobStatus,
    build_graph,
    ingest_source,
    run_imputation,
)

logger = logging.getLogger(__name__)

API_PREFIX = "/v1"


class ApiError(Exception):
    def __init__(self, status_code: int, detail: str):
        self.status_code = status_code
        self.detail = detail


@dataclass
class ServingState:
    """Everything one snapshot serves; never mutated after build."""

    graph: KnowledgeGraph = field(default_factory=KnowledgeGraph)
    trajectories: list[Trajectory] = field(default_factory=list)
    segments_by_vessel: dict[int, list[Segment]] = field(default_factory=dict)
    segments_by_id: dict[str, Segment] = field(default_factory=dict)
    gaps: list[Gap] = field(default_factory=list)
    reports: dict[str, SegmentReport] = field(default_factory=dict)

    @classmethod
    def from_store(cls, store: Store) -> "ServingState":
        graph = store.read_graph() or KnowledgeGraph()
        trajectories = store.read_trajectories()
        segments = store.read_segments()
        gaps = store.read_gaps()
        reports = {r.segment_id: r for r in store.read_reports()}

        by_vessel: dict[int, list[Segment]] = {}
        for seg in segments:
            by_vessel.setdefault(seg.vessel_id, []).append(seg)
        for vessel_segments in by_vessel.values():
            vessel_segments.sort(key=segment_sort_key)

        state = cls(
            graph=graph,
            trajectories=sorted(trajectories, key=lambda t: t.vessel_id),
            segments_by_vessel=by_vessel,
            segments_by_id={s.segment_id: s for s in segments},
            gaps=gaps,
            reports=reports,
        )

        if not state.reports and segments:
            config_doc = store.read_config()
            ports = PortDirectory()
            if config_doc is not None:
                try:
                    ports = JobConfig.from_doc(config_doc).load_ports()
                except (ValueError, OSError):
                    logger.warning("stored config unusable; composing reports without ports")
            state.reports = compose_all_reports(segments, graph, ports)
        return state


def _doc(kind: str, **fields) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **fields}


def _check_query(request: Request, allowed: set[str]) -> None:
    unknown = set(request.query_params) - allowed
    if unknown:
        raise ApiError(400, f"unknown query parameters: {sorted(unknown)}")


def _parse_bbox(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise ApiError(400, "bbox must be min_lon,min_lat,max_lon,max_lat")
    try:
        min_lon, min_lat, max_lon, max_lat = (float(p) for p in parts)
    except ValueError:
        raise ApiError(400, "bbox values must be numbers") from None
    if min_lon > max_lon or min_lat > max_lat:
        raise ApiError(400, "bbox is not well-ordered")
    return min_lon, min_lat, max_lon, max_lat


def _parse_time(text: str, name: str):
    try:
        return parse_timestamp(text)
    except ValueError:
        raise ApiError(400, f"{name} is not a valid timestamp") from None


def trajectory_summary(traj: Trajectory) -> dict:
    lats = [r.lat for r in traj.records]
    lons = [r.lon for r in traj.records]
    from .documents import format_timestamp

    return {
        "mmsi": traj.vessel_id,
        "record_count": len(traj.records),
        "time_from": format_timestamp(traj.records[0].timestamp),
        "time_to": format_timestamp(traj.records[-1].timestamp),
        "bbox": [min(lons), min(lats), max(lons), max(lats)],
    }


def create_app(data_dir: str | Path, registry: MethodRegistry | None = None) -> FastAPI:
    app = FastAPI(title="vesselkg service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    root = StoreRoot(data_dir)
    initial = root.current()
    app.state.serving = ServingState.from_store(initial) if initial else ServingState()
    app.state.root = root
    app.state.registry = registry or MethodRegistry.default()
    app.state.jobs = {}
    app.state.job_lock = threading.Lock()
    app.state.swap_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status_code,
            content=_doc("error", detail=exc.detail),
        )

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content=_doc("error", detail=str(exc.detail)),
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=_doc("error", detail=str(exc.errors())))

    def state() -> ServingState:
        return app.state.serving

    # --- trajectories -----------------------------------------------------

    @app.get(f"{API_PREFIX}/trajectories")
    async def list_trajectories(request: Request):
        _check_query(request, {"mmsi", "time_from", "time_to", "bbox", "limit", "offset"})
        params = request.query_params
        snapshot = state()

        mmsi = None
        if "mmsi" in params:
            try:
                mmsi = int(params["mmsi"])
            except ValueError:
                raise ApiError(400, "mmsi must be an integer") from None
        time_from = _parse_time(params["time_from"], "time_from") if "time_from" in params else None
        time_to = _parse_time(params["time_to"], "time_to") if "time_to" in params else None
        if time_from is not None and time_to is not None and time_from > time_to:
            raise ApiError(400, "time_from must be <= time_to")
        bbox = _parse_bbox(params["bbox"]) if "bbox" in params else None
        try:
            offset = int(params.get("offset", 0))
            limit = int(params["limit"]) if "limit" in params else None
        except ValueError:
            raise ApiError(400, "limit/offset must be integers") from None

        matches = [
            t
            for t in snapshot.trajectories
            if trajectory_matches(t, mmsi, time_from, time_to, bbox)
        ]
        total = len(matches)
        matches = matches[offset:]
        if limit is not None:
            matches = matches[:limit]
        return _doc(
            "trajectory_page",
            total=total,
            trajectories=[trajectory_summary(t) for t in matches],
        )

    # --- segments ---------------------------------------------------------

    @app.get(f"{API_PREFIX}/vessels/{{mmsi}}/segments")
    async def get_segments(mmsi: int, request: Request):
        _check_query(request, set())
        snapshot = state()
        if mmsi not in snapshot.segments_by_vessel:
            raise ApiError(404, f"unknown mmsi: {mmsi}")
        return _doc(
            "segment_page",
            mmsi=mmsi,
            segments=[segment_to_doc(s) for s in snapshot.segments_by_vessel[mmsi]],
        )

    @app.get(f"{API_PREFIX}/segments/{{segment_id}}/report")
    async def get_segment_report(segment_id: str, request: Request):
        _check_query(request, set())
        snapshot = state()
        report = snapshot.reports.get(segment_id)
        if report is None:
            raise ApiError(404, f"no report for segment: {segment_id}")
        return report.to_doc()

    @app.get(f"{API_PREFIX}/segments/{{segment_id}}/subgraph")
    async def get_segment_subgraph(segment_id: str, request: Request):
        _check_query(request, set())
        snapshot = state()
        report = snapshot.reports.get(segment_id)
        if report is None:
            raise ApiError(404, f"no report for segment: {segment_id}")
        return report.subgraph

    # --- knowledge graph ----------------------------------------------------

    @app.get(f"{API_PREFIX}/kg/nodes")
    async def kg_nodes(request: Request):
        _check_query(request, {"kind", "q"})
        params = request.query_params
        snapshot = state()
        kind = params.get("kind")
        if kind is not None and kind not in KINDS:
            raise ApiError(400, f"unknown node kind: {kind!r}")
        needle = params.get("q", "").casefold()

        nodes = []
        for node_id in sorted(snapshot.graph.nodes):
            if kind is not None and node_id.kind != kind:
                continue
            if needle and needle not in node_id.key:
                continue
            nodes.append(KnowledgeGraph._node_doc(snapshot.graph.nodes[node_id]))
        return _doc("node_page", total=len(nodes), nodes=nodes)

    @app.get(f"{API_PREFIX}/kg/nodes/{{node_id:path}}/neighbors")
    async def kg_neighbors(node_id: str, request: Request):
        _check_query(request, set())
        snapshot = state()
        report = _node_report_or_404(snapshot.graph, node_id)
        return _doc("neighbor_page", node=node_id, neighbors=report.neighbors)

    @app.get(f"{API_PREFIX}/kg/nodes/{{node_id:path}}")
    async def kg_node(node_id: str, request: Request):
        _check_query(request, set())
        snapshot = state()
        return _node_report_or_404(snapshot.graph, node_id).to_doc()

    def _node_report_or_404(graph: KnowledgeGraph, raw_id: str):
        try:
            node_id = NodeId.parse(raw_id)
        except ValueError:
            raise ApiError(400, f"malformed node id: {raw_id!r}") from None
        try:
            return report_for_node(node_id, graph)
        except UnknownNode:
            raise ApiError(404, f"unknown node: {raw_id}") from None

    # --- jobs ----------------------------------------------------------------

    @app.post(f"{API_PREFIX}/jobs", status_code=202)
    async def submit_job(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "request body must be a JSON document") from None
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be an object")
        body.pop("schema_version", None)
        body.pop("kind", None)
        try:
            cfg = JobConfig.from_doc(body)
        except (ValueError, TypeError) as exc:
            raise ApiError(400, f"invalid job config: {exc}") from None

        if not app.state.job_lock.acquire(blocking=False):
            raise ApiError(409, "another job is already running")
        status = JobStatus()
        app.state.jobs[status.job_id] = status
        thread = threading.Thread(
            target=_run_job, args=(app, cfg, status), daemon=True
        )
        thread.start()
        return _doc("job_submitted", job_id=status.job_id)

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    async def get_job(job_id: str, request: Request):
        _check_query(request, set())
        status = app.state.jobs.get(job_id)
        if status is None:
            raise ApiError(404, f"unknown job: {job_id}")
        return status.to_doc()

    return app


def trajectory_matches(
    traj: Trajectory,
    mmsi: int | None,
    time_from,
    time_to,
    bbox: tuple[float, float, float, float] | None,
) -> bool:
    """A trajectory matches iff every provided filter matches."""
    if mmsi is not None and traj.vessel_id != mmsi:
        return False
    if time_from is not None and traj.records[-1].timestamp < time_from:
        return False
    if time_to is not None and traj.records[0].timestamp > time_to:
        return False
    if bbox is not None:
        min_lon, min_lat, max_lon, max_lat = bbox
        if not any(
            min_lon <= r.lon <= max_lon and min_lat <= r.lat <= max_lat
            for r in traj.records
        ):
            return False
    return True


def _run_job(app: FastAPI, cfg: JobConfig, status: JobStatus) -> None:
    """Build a fresh snapshot and swap it in; always releases the job lock."""
    try:
        root: StoreRoot = app.state.root
        registry: MethodRegistry = app.state.registry
        snapshot = root.new_snapshot(status.job_id)
        snapshot.write_config(cfg.to_doc())

        trajectories = ingest_source(cfg, status)
        graph, raw_segments, gaps = build_graph(trajectories, cfg, status, registry)
        imputed, status = run_imputation(
            graph, trajectories, cfg, status, registry, finish=False
        )

        segments = sorted(
            [*raw_segments, *imputed], key=lambda s: (s.vessel_id, segment_sort_key(s))
        )
        reports = compose_all_reports(segments, graph, cfg.load_ports())

        snapshot.append_trajectories(trajectories)
        snapshot.append_segments(segments)
        snapshot.append_gaps(gaps)
        snapshot.append_reports(reports.values())
        snapshot.write_graph(graph)

        root.activate(status.job_id)
        with app.state.swap_lock:
            app.state.serving = ServingState.from_store(snapshot)
        status.advance("done")
        snapshot.write_job_status(status.to_doc())
    except JobFailed:
        logger.exception("job %s failed", status.job_id)
    except Exception as exc:
        logger.exception("job %s failed", status.job_id)
        status.fail(str(exc))
    finally:
        app.state.job_lock.release()


def run(data_dir: str | Path, host: str = "127.0.0.1", port: int = 8080) -> None:
    import uvicorn

    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="warning")
