"""Command-line driver: the headless face of the pipeline.

Every command is a thin composition of module operations against a
data directory (a store snapshot). Exit codes: 0 success, 2 bad
config/usage, 3 missing input data, 4 job failure, 1 anything else.
--format structured prints one canonical JSON document instead of text.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .ais import Gap, Trajectory
from .behavior import gap_static_attrs
from .documents import SCHEMA_VERSION, SchemaError, dump_document
from .explanation import compose_all_reports
from .graph import EmptyRanking, KnowledgeGraph, NodeId, behavior_node_id, node_display
from .imputation import GapContext, MethodRegistry, benchmark, estimate_and_select
from .sources import SourceConfig
from .store import Store
from .workflow import (
    JobConfig,
    JobFailed,
    JobStatus,
    build_graph,
    ingest_source,
    run_imputation,
)

EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_JOB = 4

_FORMAT_OPTION = click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "structured"]),
    default="text",
    help="Output style; structured prints one canonical JSON document.",
)


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _emit(doc: dict, fmt: str, text_lines: list[str]) -> None:
    if fmt == "structured":
        click.echo(dump_document({"schema_version": SCHEMA_VERSION, **doc}))
    else:
        for line in text_lines:
            click.echo(line)


def _load_config(path: str) -> JobConfig:
    try:
        return JobConfig.from_file(path)
    except FileNotFoundError:
        _fail(f"config file not found: {path}", EXIT_MISSING)
    except (ValueError, SchemaError) as exc:
        _fail(f"invalid config: {exc}", EXIT_CONFIG)
    raise AssertionError("unreachable")


def _store_config(store: Store, data_dir: str) -> JobConfig:
    doc = store.read_config()
    if doc is None:
        # A store created outside `ingest` has no config; fall back to
        # defaults with the data dir itself as a placeholder source.
        return JobConfig(
            source=SourceConfig(
                name="local",
                url_template=str(data_dir),
                date_from="1970-01-01",
                date_to="1970-01-01",
            )
        )
    try:
        return JobConfig.from_doc(doc)
    except ValueError as exc:
        _fail(f"stored config is invalid: {exc}", EXIT_CONFIG)
        raise AssertionError("unreachable")


def _read_trajectories(store: Store) -> list[Trajectory]:
    return store.read_trajectories()


def _load_graph_file(path: str) -> KnowledgeGraph:
    try:
        return KnowledgeGraph.load_text(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        _fail(f"graph file not found: {path}", EXIT_MISSING)
    except SchemaError as exc:
        _fail(f"bad graph file: {exc}", EXIT_CONFIG)
    raise AssertionError("unreachable")


@click.group()
def main() -> None:
    """Vessel trajectory analysis: ingest, graph construction, imputation."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Job config JSON.")
@click.option("--data", "data_dir", required=True, type=click.Path(), help="Output data directory.")
@_FORMAT_OPTION
def ingest(config_path: str, data_dir: str, fmt: str) -> None:
    """Fetch and clean the configured source into the data directory."""
    cfg = _load_config(config_path)
    status = JobStatus()
    try:
        trajectories = ingest_source(cfg, status)
    except JobFailed as exc:
        _fail(str(exc), EXIT_JOB)
        return

    store = Store(data_dir)
    store.write_config(cfg.to_doc())
    store.append_trajectories(trajectories)
    store.write_job_status(status.to_doc())

    dropped = sum(status.dropped.values())
    _emit(
        {
            "kind": "ingest_result",
            "records_parsed": status.counters["records_parsed"],
            "records_dropped": dict(sorted(status.dropped.items())),
            "trajectories": len(trajectories),
        },
        fmt,
        [
            f"parsed {status.counters['records_parsed']} records "
            f"({dropped} dropped) into {len(trajectories)} trajectories",
            *(f"  dropped {count}: {reason}" for reason, count in sorted(status.dropped.items())),
        ],
    )


@main.command("build-kg")
@click.option("--data", "data_dir", required=True, type=click.Path(), help="Data directory.")
@_FORMAT_OPTION
def build_kg(data_dir: str, fmt: str) -> None:
    """Build the knowledge graph from ingested trajectories."""
    store = Store(data_dir)
    cfg = _store_config(store, data_dir)
    trajectories = _read_trajectories(store)

    status = JobStatus(phase="ingesting")
    try:
        graph, segments, gaps = build_graph(trajectories, cfg, status)
    except JobFailed as exc:
        _fail(str(exc), EXIT_JOB)
        return

    store.write_graph(graph)
    store.append_segments(segments)
    store.append_gaps(gaps)
    store.write_job_status(status.to_doc())

    _emit(
        {
            "kind": "build_result",
            "nodes": len(graph.nodes),
            "edges": len(graph.edges),
            "transitions": len(graph.transitions),
            "segments": len(segments),
            "gaps": len(gaps),
        },
        fmt,
        [
            f"{len(graph.nodes)} nodes, {len(graph.edges)} edges, "
            f"{len(graph.transitions)} transitions",
            f"{len(segments)} segments, {len(gaps)} gaps",
        ],
    )


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(), help="Data directory.")
@click.option("--kg", "kg_path", default=None, type=click.Path(), help="Graph document (default: <data>/graph.json).")
@_FORMAT_OPTION
def impute(data_dir: str, kg_path: str | None, fmt: str) -> None:
    """Impute every detected gap using the knowledge graph."""
    store = Store(data_dir)
    cfg = _store_config(store, data_dir)
    graph = _load_graph_file(kg_path or str(Path(data_dir) / "graph.json"))
    trajectories = _read_trajectories(store)
    if not trajectories:
        _fail(f"no trajectories in {data_dir}; run ingest first", EXIT_MISSING)

    status = JobStatus(phase="imputing")
    try:
        imputed, status = run_imputation(graph, trajectories, cfg, status)
    except JobFailed as exc:
        _fail(str(exc), EXIT_JOB)
        return

    store.append_segments(imputed)
    segments = store.read_segments()
    reports = compose_all_reports(segments, graph, cfg.load_ports())
    store.append_reports(reports.values())
    store.write_job_status(status.to_doc())

    _emit(
        {
            "kind": "impute_result",
            "gaps": status.counters["imputed_segments"],
            "imputed_segments": status.counters["imputed_segments"],
            "fallbacks": status.counters["fallbacks"],
            "reports": len(reports),
        },
        fmt,
        [
            f"imputed {status.counters['imputed_segments']} gap(s), "
            f"{status.counters['fallbacks']} fallback(s)",
            f"wrote {len(reports)} segment report(s)",
        ],
    )


@main.command("eval")
@click.option("--data", "data_dir", required=True, type=click.Path(), help="Data directory.")
@click.option("--kg", "kg_path", default=None, type=click.Path(), help="Graph document (default: <data>/graph.json).")
@_FORMAT_OPTION
def eval_cmd(data_dir: str, kg_path: str | None, fmt: str) -> None:
    """Masked-gap evaluation: hide segment interiors, impute, score.

    Prints mean haversine error per method over all eligible raw
    segments, and per behavior for the pipeline-selected method.
    """
    store = Store(data_dir)
    cfg = _store_config(store, data_dir)
    graph = _load_graph_file(kg_path or str(Path(data_dir) / "graph.json"))
    segments = [s for s in store.read_segments() if s.provenance == "raw"]
    if not segments:
        _fail(f"no raw segments in {data_dir}; run build-kg first", EXIT_MISSING)

    registry = MethodRegistry.default()
    ports = cfg.load_ports()
    per_method: dict[str, list[float]] = {key: [] for key in registry.keys()}
    per_behavior: dict[str, list[float]] = {}

    evaluated = 0
    for seg in segments:
        if len(seg.records) < 5 or seg.behavior_id is None:
            continue
        result = benchmark(seg, registry)
        for key, err in result.mean_error_m.items():
            per_method[key].append(err)

        pseudo = Gap(
            gap_id=f"{seg.segment_id}-eval",
            vessel_id=seg.vessel_id,
            before=seg.records[1],
            after=seg.records[-2],
        )
        ctx = GapContext(
            gap=pseudo,
            static_attrs=gap_static_attrs(pseudo.before, pseudo.after, ports),
            prev_behavior=None,
        )
        selection = estimate_and_select(graph, ctx)
        chosen_error = result.mean_error_m[
            selection.method_key if selection.method_key in result.mean_error_m else "linear"
        ]
        behavior_name = node_display(graph.nodes[NodeId.parse(seg.behavior_id)]) if NodeId.parse(
            seg.behavior_id
        ) in graph.nodes else seg.behavior_id
        per_behavior.setdefault(behavior_name, []).append(chosen_error)
        evaluated += 1

    method_means = {
        key: (sum(errs) / len(errs) if errs else None) for key, errs in sorted(per_method.items())
    }
    behavior_means = {
        name: {"mean_error_m": sum(errs) / len(errs), "segments": len(errs)}
        for name, errs in sorted(per_behavior.items())
    }

    lines = [f"evaluated {evaluated} segment(s)", "per-method mean error:"]
    for key, mean in method_means.items():
        shown = f"{mean:.2f} m" if mean is not None else "n/a"
        lines.append(f"  {key:<14} {shown}")
    lines.append("per-behavior mean error (selected method):")
    for name, entry in behavior_means.items():
        lines.append(f"  {name:<32} {entry['mean_error_m']:.2f} m ({entry['segments']} segment(s))")

    _emit(
        {
            "kind": "eval_report",
            "evaluated_segments": evaluated,
            "methods": method_means,
            "behaviors": behavior_means,
        },
        fmt,
        lines,
    )


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(), help="Data directory.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
def serve(data_dir: str, host: str, port: int) -> None:
    """Run the HTTP query service over the data directory."""
    from .service import run

    run(data_dir, host=host, port=port)


@main.group()
def kg() -> None:
    """Inspect the knowledge graph."""


@kg.command()
@click.option("--data", "data_dir", default=None, type=click.Path(), help="Data directory holding graph.json.")
@click.option("--kg", "kg_path", default=None, type=click.Path(), help="Graph document path.")
@click.option("--attr", "attrs", multiple=True, help='Context attribute as "class=display"; repeatable.')
@click.option("--prev", "prev_name", default=None, help="Previous behavior pattern name.")
@click.option("-k", "top_k", default=5, show_default=True, type=int)
@_FORMAT_OPTION
def top(data_dir: str | None, kg_path: str | None, attrs: tuple[str, ...], prev_name: str | None, top_k: int, fmt: str) -> None:
    """Rank behaviors for a static-attribute context."""
    if kg_path is None:
        if data_dir is None:
            _fail("provide --kg or --data", EXIT_CONFIG)
        kg_path = str(Path(data_dir) / "graph.json")
    graph = _load_graph_file(kg_path)

    parsed_attrs = []
    for item in attrs:
        attr_class, sep, display = item.partition("=")
        if not sep or not attr_class or not display:
            _fail(f'attribute must look like "vessel_type=Cargo": {item!r}', EXIT_CONFIG)
        parsed_attrs.append((attr_class.strip(), display.strip()))
    if not parsed_attrs:
        _fail("provide at least one --attr", EXIT_CONFIG)

    prev_id = None
    if prev_name is not None:
        prev_id = behavior_node_id(prev_name)

    try:
        ranked = graph.rank_behaviors(parsed_attrs, prev_id, k=top_k)
    except EmptyRanking:
        _emit(
            {"kind": "ranking", "behaviors": []},
            fmt,
            ["no behavior has evidence for this context"],
        )
        return
    except ValueError as exc:
        _fail(str(exc), EXIT_CONFIG)
        return

    entries = []
    for node_id, score in ranked:
        node = graph.nodes.get(node_id)
        display = node_display(node) if node is not None else node_id.key
        entries.append({"node": str(node_id), "display": display, "score": score})
    _emit(
        {"kind": "ranking", "behaviors": entries},
        fmt,
        [f"{e['score']:.4f}  {e['display']}" for e in entries],
    )


if __name__ == "__main__":
    main()
