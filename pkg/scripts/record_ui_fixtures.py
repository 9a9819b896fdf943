#!/usr/bin/env python3
"""Record live service responses into frontend/tests/fixtures/recorded.json.

Runs the full pipeline on the bundled sample dataset, serves it with the
real app, and captures every response the browser UI consumes, so the
frontend test suite runs against genuine wire documents with no backend.
The job-status sequence is captured stage by stage from a real run.
"""

from __future__ import annotations

import copy
import json
import sys
import tempfile
from datetime import date
from pathlib import Path
from urllib.parse import quote

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fastapi.testclient import TestClient

from vesselkg.explanation import compose_all_reports, segment_sort_key
from vesselkg.service import create_app
from vesselkg.sources import SourceConfig
from vesselkg.store import Store
from vesselkg.workflow import (
    JobConfig,
    JobStatus,
    build_graph,
    bundled_sample_path,
    ingest_source,
    run_imputation,
)

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures" / "recorded.json"


def sample_config(cache_dir: str) -> JobConfig:
    return JobConfig(
        source=SourceConfig(
            name="sample",
            url_template=str(bundled_sample_path()),
            date_from=date(2024, 1, 1),
            date_to=date(2024, 1, 1),
            cache_dir=cache_dir,
        )
    )


def build_store(tmp: Path) -> tuple[Store, JobConfig, list]:
    cfg = sample_config(str(tmp / "cache"))
    status = JobStatus()
    trajectories = ingest_source(cfg, status)
    graph, raw_segments, gaps = build_graph(trajectories, cfg, status)
    imputed, status = run_imputation(graph, trajectories, cfg, status)

    segments = sorted(
        [*raw_segments, *imputed], key=lambda s: (s.vessel_id, segment_sort_key(s))
    )
    reports = compose_all_reports(segments, graph, cfg.load_ports())

    store = Store(tmp / "data")
    store.write_config(cfg.to_doc())
    store.append_trajectories(trajectories)
    store.append_segments(segments)
    store.append_gaps(gaps)
    store.append_reports(reports.values())
    store.write_graph(graph)
    store.write_job_status(status.to_doc())
    return store, cfg, [s for s in segments if s.provenance == "imputed"]


def record_job_sequence(tmp: Path) -> list[dict]:
    """One real job, its status captured after every pipeline stage."""
    cfg = sample_config(str(tmp / "cache2"))
    status = JobStatus()
    docs = [copy.deepcopy(status.to_doc())]  # downloading
    trajectories = ingest_source(cfg, status)
    docs.append(copy.deepcopy(status.to_doc()))  # ingesting
    graph, _, _ = build_graph(trajectories, cfg, status)
    docs.append(copy.deepcopy(status.to_doc()))  # building_kg
    _, status = run_imputation(graph, trajectories, cfg, status, finish=False)
    docs.append(copy.deepcopy(status.to_doc()))  # imputing
    status.advance("done")
    docs.append(copy.deepcopy(status.to_doc()))  # done
    return docs


def main() -> None:
    tmp = Path(tempfile.mkdtemp(prefix="uifixtures-"))
    store, cfg, imputed = build_store(tmp)
    client = TestClient(create_app(tmp / "data"))

    imputed_id = imputed[0].segment_id
    port_entry = "behavior:port-entry: decelerate–align"
    routes: dict[str, dict] = {}

    def record(path: str, expect: int = 200) -> dict:
        response = client.get(path)
        assert response.status_code == expect, f"{path}: {response.status_code}"
        routes[f"GET {path}"] = response.json()
        return routes[f"GET {path}"]

    record("/v1/trajectories")
    record("/v1/trajectories?mmsi=219000001")
    record("/v1/trajectories?bbox=0,0,1,1")
    for mmsi in (219000001, 219000002, 219000003):
        record(f"/v1/vessels/{mmsi}/segments")
    record(f"/v1/segments/{imputed_id}/report")
    record(f"/v1/segments/{imputed_id}/subgraph")
    record("/v1/kg/nodes")
    record("/v1/kg/nodes?q=port")
    record("/v1/kg/nodes?kind=method")
    node_page = routes["GET /v1/kg/nodes"]
    for node in node_page["nodes"]:
        encoded = quote(node["id"], safe="")
        record(f"/v1/kg/nodes/{encoded}")
        record(f"/v1/kg/nodes/{encoded}/neighbors")
    assert f"GET /v1/kg/nodes/{quote(port_entry, safe='')}" in routes

    fixtures = {
        "imputed_segment_id": imputed_id,
        "port_entry_node_id": port_entry,
        "job_config": cfg.to_doc(),
        "job_sequence": record_job_sequence(tmp),
        "routes": routes,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(routes)} routes to {OUT}")


if __name__ == "__main__":
    main()
