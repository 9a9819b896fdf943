"""Acceptance gate: one test per top-level product guarantee.

Each test here re-derives its expected values independently (brute-force
recounts, hand-built fixtures, closed-form geometry) rather than reusing
library internals, so a pass means the shipped behavior matches the
contract, not itself. The terminal summary prints one verdict line per
check (see conftest).
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import math
import random
import time
from collections import Counter

import pytest
from fastapi.testclient import TestClient

from conftest import T0, rec, sample_config
from vesselkg.ais import Gap, Segment
from vesselkg.behavior import (
    PATTERNS,
    PORT_ENTRY,
    STATIONARY,
    TRANSIT,
    Port,
    PortDirectory,
    gap_static_attrs,
)
from vesselkg.explanation import FALLBACK_MARKER, compose, compose_all_reports
from vesselkg.graph import (
    KnowledgeGraph,
    NodeId,
    behavior_node_id,
    method_node_id,
    static_attr_id,
)
from vesselkg.imputation import (
    FillContext,
    GapContext,
    MethodRegistry,
    benchmark,
    impute_gap,
    linear_fill,
    smooth_curve_fill,
)
from vesselkg.service import create_app
from vesselkg.store import Store
from vesselkg.workflow import (
    JobStatus,
    build_graph,
    ingest_source,
    run_imputation,
)

REGISTRY = MethodRegistry.default()


def observe(g: KnowledgeGraph, attrs, pattern, method, prev) -> None:
    display = REGISTRY.get(method).display if method else ""
    description = REGISTRY.get(method).description if method else ""
    g.observe_segment(
        attrs,
        pattern,
        best_method=method,
        prev_behavior=prev,
        method_display=display,
        method_description=description,
    )


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full construction + imputation run over the bundled data."""
    cfg = sample_config(str(tmp_path_factory.mktemp("acc-cache")))
    status = JobStatus()
    trajectories = ingest_source(cfg, status)
    graph, raw_segments, gaps = build_graph(trajectories, cfg, status)
    imputed, status = run_imputation(graph, trajectories, cfg, status)
    return {
        "cfg": cfg,
        "status": status,
        "trajectories": trajectories,
        "graph": graph,
        "raw_segments": raw_segments,
        "gaps": gaps,
        "imputed": imputed,
    }


# --- 1: counting oracle -----------------------------------------------------


def test_graph_counts_match_brute_force_recount():
    pool = [
        ("vessel_type", "Cargo"),
        ("vessel_type", "Tanker"),
        ("vessel_type", "Fishing"),
        ("nav_status", "Under way using engine"),
        ("nav_status", "Moored"),
        ("nav_status", "Engaged in fishing"),
        ("spatial_context", "near-port:Aarhus"),
        ("spatial_context", "open-sea"),
    ]
    rng = random.Random(11)
    log = []
    for _ in range(500):
        log.append(
            (
                rng.sample(pool, k=rng.randint(1, 4)),
                rng.choice(PATTERNS),
                rng.choice([None, "linear", "smooth_curve", "stationary"]),
                rng.choice([None, *PATTERNS]),
            )
        )

    g = KnowledgeGraph()
    for attrs, pattern, method, prev in log:
        observe(g, attrs, pattern, method, prev)

    seen = Counter()
    success = Counter()
    edges = Counter()
    transitions = Counter()
    for attrs, pattern, method, prev in log:
        behavior = str(behavior_node_id(pattern.name))
        seen[behavior] += 1
        for attr_class, display in attrs:
            attr = str(static_attr_id(attr_class, display))
            seen[attr] += 1
            edges[(attr, behavior)] += 1
        if method is not None:
            success[str(method_node_id(method))] += 1
            edges[(behavior, str(method_node_id(method)))] += 1
        if prev is not None:
            transitions[(str(behavior_node_id(prev.name)), behavior)] += 1

    got_seen = {
        str(node_id): getattr(node, "seen_count", None)
        for node_id, node in g.nodes.items()
        if node_id.kind != "method"
    }
    got_success = {
        str(node_id): node.success_count
        for node_id, node in g.nodes.items()
        if node_id.kind == "method"
    }
    got_edges = {(str(a), str(b)): w for (a, b), w in g.edges.items()}
    got_transitions = {(str(p), str(b)): c for (p, b), c in g.transitions.items()}

    assert got_seen == dict(seen)
    assert got_success == dict(success)
    assert got_edges == dict(edges)
    assert got_transitions == dict(transitions)


# --- 2: order and parallelism independence -------------------------------------


def test_saved_graph_identical_across_workers_and_orderings(
    fixture_trajectories, tmp_path
):
    base = sample_config(str(tmp_path / "cache"))
    rng = random.Random(42)
    texts = []
    for workers in (1, 4, 8):
        cfg = dataclasses.replace(base, worker_count=workers)
        graph, _, _ = build_graph(
            list(fixture_trajectories), cfg, JobStatus(phase="ingesting")
        )
        texts.append(graph.save_text())
    for _ in range(3):
        shuffled = list(fixture_trajectories)
        rng.shuffle(shuffled)
        graph, _, _ = build_graph(shuffled, base, JobStatus(phase="ingesting"))
        texts.append(graph.save_text())
    assert len(set(texts)) == 1


# --- 3: ranking properties ------------------------------------------------------


def test_rankings_survive_weight_scaling_and_fall_back_cleanly():
    log = [
        ([("vessel_type", "Cargo"), ("spatial_context", "near-port:Aarhus")],
         PORT_ENTRY, "smooth_curve", TRANSIT),
        ([("vessel_type", "Cargo")], TRANSIT, "linear", None),
        ([("vessel_type", "Cargo")], TRANSIT, "smooth_curve", TRANSIT),
        ([("vessel_type", "Tanker")], TRANSIT, "linear", PORT_ENTRY),
        ([("nav_status", "Moored")], STATIONARY, "stationary", PORT_ENTRY),
    ]

    def fold(copies: int) -> KnowledgeGraph:
        g = KnowledgeGraph()
        for _ in range(copies):
            for attrs, pattern, method, prev in log:
                observe(g, attrs, pattern, method, prev)
        return g

    single, scaled = fold(1), fold(7)
    contexts = [
        ([("vessel_type", "Cargo")], None),
        ([("vessel_type", "Cargo"), ("spatial_context", "near-port:Aarhus")], None),
        ([("vessel_type", "Tanker"), ("nav_status", "Moored")],
         behavior_node_id(PORT_ENTRY.name)),
    ]
    for attrs, prev in contexts:
        a = single.rank_behaviors(attrs, prev, k=10)
        b = scaled.rank_behaviors(attrs, prev, k=10)
        assert a == b  # same order and same normalized scores
        assert a[0] == b[0]
    for pattern in (TRANSIT, STATIONARY, PORT_ENTRY):
        node = behavior_node_id(pattern.name)
        assert single.rank_methods(node, k=5) == scaled.rank_methods(node, k=5)

    # equal scores resolve in canonical key order
    ties = KnowledgeGraph()
    observe(ties, [("vessel_type", "Cargo")], STATIONARY, "stationary", None)
    observe(ties, [("vessel_type", "Cargo")], TRANSIT, "linear", None)
    ranked = ties.rank_behaviors([("vessel_type", "Cargo")], k=2)
    assert [node_id for node_id, _ in ranked] == [
        behavior_node_id(STATIONARY.name),
        behavior_node_id(TRANSIT.name),
    ]
    assert ranked[0][1] == ranked[1][1] == 0.5

    # no evidence at all: impute_gap falls back to transit + linear, flagged
    gap = Gap(gap_id="g", vessel_id=1, before=rec(0), after=rec(30, lon=11.1))
    ctx = GapContext(
        gap=gap,
        static_attrs={("vessel_type", "Cargo")},
        prev_behavior=None,
        fill_context=FillContext(),
    )
    seg = impute_gap(KnowledgeGraph(), REGISTRY, ctx, 60)
    assert seg.fallback_used
    assert seg.behavior_id == str(behavior_node_id(TRANSIT.name))
    assert seg.method_key == "linear"


# --- 4: the near-port cargo story ---------------------------------------------


def test_port_entry_story_reproduced_from_fixture_graph():
    port = Port("Harborville", 56.0, 11.0, 5000.0)
    ports = PortDirectory([port])
    story_attrs = [
        ("vessel_type", "Cargo"),
        ("nav_status", "Underway using engine"),
        ("spatial_context", "near-port:Harborville"),
    ]
    g = KnowledgeGraph()
    for _ in range(3):
        observe(g, story_attrs, PORT_ENTRY, "smooth_curve", None)
    observe(
        g, [("vessel_type", "Cargo"), ("spatial_context", "open-sea")],
        TRANSIT, "linear", None,
    )

    before = rec(0, lat=56.02, lon=10.95, nav_status="Underway using engine")
    after = rec(20, lat=56.0, lon=11.01, sog=4.0, nav_status="Underway using engine")
    gap = Gap(gap_id="g", vessel_id=before.vessel_id, before=before, after=after)
    attrs = gap_static_attrs(before, after, ports)
    assert attrs == set(story_attrs)

    seg = impute_gap(
        g,
        REGISTRY,
        GapContext(gap=gap, static_attrs=attrs, prev_behavior=None,
                   fill_context=FillContext()),
        60,
    )
    assert not seg.fallback_used
    behavior_node = g.nodes[NodeId.parse(seg.behavior_id)]
    assert behavior_node.pattern.name == "Port-Entry: Decelerate–Align"
    assert REGISTRY.get(seg.method_key).display == "Smooth Curve Filler"

    report = compose(seg, g, ports=ports)
    behavior_ref = str(behavior_node_id(PORT_ENTRY.name))
    cited = {(ev.source, ev.target) for ev in report.evidence}
    assert cited == {
        (str(static_attr_id("vessel_type", "Cargo")), behavior_ref),
        (str(static_attr_id("nav_status", "Underway using engine")), behavior_ref),
        (str(static_attr_id("spatial_context", "near-port:Harborville")), behavior_ref),
        (behavior_ref, str(method_node_id("smooth_curve"))),
    }
    assert "Underway using engine" in report.explanation
    assert "Smooth Curve Filler" in report.explanation


# --- 5: filler accuracy ---------------------------------------------------------


def seg_of(records) -> Segment:
    return Segment(segment_id="s", vessel_id=records[0].vessel_id, records=records)


def test_filler_accuracy_on_straight_sinusoidal_and_stationary_tracks():
    straight = seg_of(
        [rec(i, lon=11.0 + 0.003 * i, sog=12.0, cog=90.0) for i in range(30)]
    )
    result = benchmark(straight, REGISTRY)
    assert result.mean_error_m["linear"] < 1.0

    # ~1 km amplitude, ~10 km wavelength, 60 s sampling, 10 masked points
    records = []
    for i in range(14):
        x = 500.0 * i
        y = 1000.0 * math.sin(2 * math.pi * x / 10_000.0)
        lat = 56.0 + y / 111_320.0
        lon = 11.0 + x / (111_320.0 * math.cos(math.radians(56.0)))
        records.append(rec(i, lat=lat, lon=lon, sog=16.0, cog=90.0))
    sinusoid = seg_of(records)
    assert len(sinusoid.records) - 4 == 10
    result = benchmark(sinusoid, REGISTRY)
    assert result.mean_error_m["smooth_curve"] < result.mean_error_m["linear"]

    stationary = seg_of([rec(i, sog=0.1) for i in range(12)])
    result = benchmark(stationary, REGISTRY)
    assert result.mean_error_m["stationary"] == 0.0


# --- 6: collinear degeneracy ------------------------------------------------------


def test_collinear_control_points_degenerate_to_the_chord():
    gap = Gap(
        gap_id="g",
        vessel_id=219000001,
        before=rec(0, lat=56.0, lon=11.0),
        after=rec(1, lat=56.0, lon=11.002),
    )
    ctx = FillContext(p0=(56.0, 10.998), p3=(56.0, 11.004))
    times = [T0 + dt.timedelta(seconds=s) for s in range(5, 60, 5)]
    for s, l in zip(smooth_curve_fill(gap, times, ctx), linear_fill(gap, times)):
        assert abs(s.lat - l.lat) < 1e-9
        assert abs(s.lon - l.lon) < 1e-9

    start, end = smooth_curve_fill(
        gap, [gap.before.timestamp, gap.after.timestamp], ctx
    )
    assert (start.lat, start.lon) == (56.0, 11.0)
    assert (end.lat, end.lon) == (56.0, 11.002)


# --- 7: end-to-end pipeline -------------------------------------------------------


def test_pipeline_end_to_end_on_bundled_fixture(tmp_path):
    started = time.monotonic()
    cfg = sample_config(str(tmp_path / "cache"))
    status = JobStatus()
    trajectories = ingest_source(cfg, status)
    graph, raw_segments, gaps = build_graph(trajectories, cfg, status)
    imputed, status = run_imputation(graph, trajectories, cfg, status)
    reports = compose_all_reports([*raw_segments, *imputed], graph, cfg.load_ports())
    elapsed = time.monotonic() - started

    assert len(gaps) >= 2
    assert len(imputed) == len(gaps) == status.counters["gaps"]
    for seg in imputed:
        report = reports[seg.segment_id]
        assert report.method
        assert report.evidence or FALLBACK_MARKER in report.explanation
    assert status.phase == "done"
    assert elapsed < 60.0


# --- 8: API oracle equivalence ------------------------------------------------------


def test_api_filters_match_linear_scan_and_subgraphs_close(pipeline, tmp_path):
    from vesselkg.documents import format_timestamp
    from vesselkg.explanation import segment_sort_key

    segments = sorted(
        [*pipeline["raw_segments"], *pipeline["imputed"]],
        key=lambda s: (s.vessel_id, segment_sort_key(s)),
    )
    reports = compose_all_reports(segments, pipeline["graph"], pipeline["cfg"].load_ports())
    store = Store(tmp_path / "data")
    store.write_config(pipeline["cfg"].to_doc())
    store.append_trajectories(pipeline["trajectories"])
    store.append_segments(segments)
    store.append_reports(reports.values())
    store.write_graph(pipeline["graph"])
    client = TestClient(create_app(tmp_path / "data"))

    trajectories = pipeline["trajectories"]
    t_min = min(t.records[0].timestamp for t in trajectories)
    t_max = max(t.records[-1].timestamp for t in trajectories)
    span_s = (t_max - t_min).total_seconds()
    rng = random.Random(4242)

    def scan(mmsi, time_from, time_to, bbox):
        keep = []
        for traj in sorted(trajectories, key=lambda t: t.vessel_id):
            if mmsi is not None and traj.vessel_id != mmsi:
                continue
            if time_from is not None and traj.records[-1].timestamp < time_from:
                continue
            if time_to is not None and traj.records[0].timestamp > time_to:
                continue
            if bbox is not None:
                min_lon, min_lat, max_lon, max_lat = bbox
                if not any(
                    min_lat <= r.lat <= max_lat and min_lon <= r.lon <= max_lon
                    for r in traj.records
                ):
                    continue
            keep.append(traj.vessel_id)
        return keep

    for _ in range(50):
        mmsi = rng.choice([None, 219000001, 219000002, 219000003, 123456789])
        time_from = time_to = None
        if rng.random() < 0.6:
            a, b = sorted(rng.uniform(-0.1, 1.1) for _ in range(2))
            time_from = t_min + dt.timedelta(seconds=span_s * a)
            time_to = t_min + dt.timedelta(seconds=span_s * b)
        bbox = None
        if rng.random() < 0.6:
            lon_a, lon_b = sorted(round(rng.uniform(9.5, 12.5), 6) for _ in range(2))
            lat_a, lat_b = sorted(round(rng.uniform(55.5, 58.5), 6) for _ in range(2))
            bbox = (lon_a, lat_a, lon_b, lat_b)

        params = {}
        if mmsi is not None:
            params["mmsi"] = str(mmsi)
        if time_from is not None:
            params["time_from"] = format_timestamp(time_from)
            params["time_to"] = format_timestamp(time_to)
        if bbox is not None:
            params["bbox"] = ",".join(repr(v) for v in bbox)

        expected = scan(mmsi, time_from, time_to, bbox)
        response = client.get("/v1/trajectories", params=params)
        assert response.status_code == 200, response.text
        body = response.json()
        assert body["total"] == len(expected), params
        assert [t["mmsi"] for t in body["trajectories"]] == expected, params

    for segment_id in reports:
        body = client.get(f"/v1/segments/{segment_id}/subgraph").json()
        node_ids = {n["id"] for n in body["nodes"]}
        for edge in body["edges"]:
            assert edge["a"] in node_ids and edge["b"] in node_ids


# --- 9: persistence round-trips -------------------------------------------------------


def test_persistence_round_trips_preserve_structure(pipeline, tmp_path):
    graph = pipeline["graph"]
    reloaded = KnowledgeGraph.load_text(graph.save_text())
    assert reloaded.nodes == graph.nodes
    assert reloaded.edges == graph.edges
    assert reloaded.transitions == graph.transitions
    assert reloaded.save_text() == graph.save_text()

    segments = [*pipeline["raw_segments"], *pipeline["imputed"]]
    reports = compose_all_reports(segments, graph, pipeline["cfg"].load_ports())
    store = Store(tmp_path / "store")
    store.append_segments(segments)
    store.append_reports(reports.values())
    assert store.read_segments() == segments
    assert [r.to_doc() for r in store.read_reports()] == [
        r.to_doc() for r in reports.values()
    ]
