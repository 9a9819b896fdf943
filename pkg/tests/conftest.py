from __future__ import annotations

import datetime as dt

import pytest

from vesselkg.ais import AisRecord
from vesselkg.behavior import PortDirectory
from vesselkg.sources import SourceConfig
from vesselkg.workflow import (
    JobConfig,
    JobStatus,
    bundled_sample_path,
    default_ports_path,
    ingest_source,
    run_construction,
)

T0 = dt.datetime(2024, 1, 1, 6, 0, tzinfo=dt.timezone.utc)


def rec(
    minutes: float = 0.0,
    lat: float = 56.0,
    lon: float = 11.0,
    sog: float | None = 10.0,
    cog: float | None = 90.0,
    vessel_id: int = 219000001,
    nav_status: str = "Under way using engine",
    vessel_type: str = "Cargo",
    **kw,
) -> AisRecord:
    """An AisRecord at T0 + minutes; keyword overrides for the rest."""
    return AisRecord(
        vessel_id=vessel_id,
        timestamp=T0 + dt.timedelta(minutes=minutes),
        lat=lat,
        lon=lon,
        sog=sog,
        cog=cog,
        nav_status=nav_status,
        vessel_type=vessel_type,
        **kw,
    )


def sample_config(cache_dir: str) -> JobConfig:
    return JobConfig(
        source=SourceConfig(
            name="sample",
            url_template=bundled_sample_path(),
            date_from=dt.date(2024, 1, 1),
            date_to=dt.date(2024, 1, 1),
            cache_dir=cache_dir,
        )
    )


@pytest.fixture(scope="session")
def fixture_cfg(tmp_path_factory) -> JobConfig:
    return sample_config(str(tmp_path_factory.mktemp("cache")))


@pytest.fixture(scope="session")
def fixture_build(fixture_cfg):
    """(graph, segments, status) from one construction run over the bundled CSV."""
    return run_construction(fixture_cfg, JobStatus())


@pytest.fixture(scope="session")
def fixture_trajectories(fixture_cfg):
    return ingest_source(fixture_cfg, JobStatus())


@pytest.fixture(scope="session")
def ports() -> PortDirectory:
    return PortDirectory.from_file(default_ports_path())


# One verdict line per acceptance check in the terminal summary, so the
# gate's outcome is readable without scrolling through the full run.
ACCEPTANCE_LABELS = {
    "test_graph_counts_match_brute_force_recount": (
        "graph counts equal a brute-force recount of 500 observations (exact)"
    ),
    "test_saved_graph_identical_across_workers_and_orderings": (
        "saved graph byte-identical for 1/4/8 workers and 3 input orders"
    ),
    "test_rankings_survive_weight_scaling_and_fall_back_cleanly": (
        "rankings invariant under 7x weights; lexicographic ties; clean fallback"
    ),
    "test_port_entry_story_reproduced_from_fixture_graph": (
        "near-port cargo gap -> Port-Entry + Smooth Curve Filler with cited edges"
    ),
    "test_filler_accuracy_on_straight_sinusoidal_and_stationary_tracks": (
        "straight < 1 m linear; smooth < linear on sinusoid; stationary exactly 0"
    ),
    "test_collinear_control_points_degenerate_to_the_chord": (
        "collinear control points: smooth == linear within 1e-9 deg, exact endpoints"
    ),
    "test_pipeline_end_to_end_on_bundled_fixture": (
        "bundled-data pipeline: imputed == gaps, reports complete, under 60 s"
    ),
    "test_api_filters_match_linear_scan_and_subgraphs_close": (
        "50 randomized API filters match a linear scan; subgraphs edge-closed"
    ),
    "test_persistence_round_trips_preserve_structure": (
        "graph and segment/report stores survive save/load round-trips"
    ),
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            name = report.nodeid.rsplit("::", 1)[-1]
            if name in ACCEPTANCE_LABELS:
                verdicts[name] = "PASS" if outcome == "passed" else "FAIL"
    if not verdicts:
        return
    terminalreporter.section("acceptance checks")
    for name, label in ACCEPTANCE_LABELS.items():
        if name in verdicts:
            terminalreporter.write_line(f"{verdicts[name]}  {label}")
