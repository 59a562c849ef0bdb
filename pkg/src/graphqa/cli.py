"""Command-line entry points.

    graphqa bench run --graph fixtures/graph.json --questions fixtures/benchmark.json \
        --config fixtures/bench_config.json --replay fixtures/transcripts_demo.jsonl --out out/
    graphqa serve --graph fixtures/graph.json --llm-config fixtures/llm_config.json \
        --replay fixtures/transcripts_demo.jsonl --port 8000
    graphqa fixtures --out fixtures/
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from graphqa.benchmark import emit_report, load_benchmark, run_benchmark
from graphqa.graph import TransformConfig, apply_transforms, load_graph
from graphqa.llm import LlmConfig, TranscriptStore, load_templates
from graphqa.pipeline import KnowledgeBase


def _detect_format(path: Path) -> str:
    return "triples-tsv" if path.is_dir() else "graph-json"


def _load_kb(graph_path: str, transforms_path: str | None) -> KnowledgeBase:
    path = Path(graph_path)
    graph = load_graph(path, format=_detect_format(path))
    if transforms_path:
        graph = apply_transforms(graph, TransformConfig.load(transforms_path))
    return KnowledgeBase.from_graph(graph)


def _transcript_options(replay: str | None, record: str | None) -> tuple[TranscriptStore | None, bool]:
    if replay and record:
        raise click.UsageError("--replay and --record are mutually exclusive")
    if replay:
        return TranscriptStore(replay), False
    if record:
        return TranscriptStore(record), True
    return None, False


@click.group()
def main() -> None:
    """Question answering over a property graph with query generation and repair."""


@main.group()
def bench() -> None:
    """Benchmark harness commands."""


@bench.command("run")
@click.option("--graph", "graph_path", required=True, help="graph-json file or triples-tsv directory")
@click.option("--transforms", "transforms_path", default=None, help="optional transform config JSON")
@click.option("--questions", "questions_path", required=True, help="benchmark items JSON")
@click.option("--config", "config_path", required=True, help="run configuration JSON")
@click.option("--replay", "replay_path", default=None, help="answer from this transcript file")
@click.option("--record", "record_path", default=None, help="record live completions here")
@click.option("--templates", "templates_dir", default=None, help="prompt template directory")
@click.option("--out", "out_dir", required=True, help="output directory for reports and traces")
def bench_run(
    graph_path: str,
    transforms_path: str | None,
    questions_path: str,
    config_path: str,
    replay_path: str | None,
    record_path: str | None,
    templates_dir: str | None,
    out_dir: str,
) -> None:
    """Run every configured (model, template) over the question set."""
    kb = _load_kb(graph_path, transforms_path)
    items = load_benchmark(questions_path)
    templates = {t.id: t for t in load_templates(templates_dir)}
    run_config = json.loads(Path(config_path).read_text(encoding="utf-8"))

    configs = []
    for run in run_config.get("runs", []):
        template_id = run.get("template", "zero_shot")
        if template_id not in templates:
            raise click.UsageError(
                f"unknown template {template_id!r}; valid: {sorted(templates)}"
            )
        if replay_path:
            run = {**run, "backend": "replay"}
        configs.append((LlmConfig.from_dict(run), templates[template_id]))
    if not configs:
        raise click.UsageError(f"{config_path}: no runs configured")

    transcripts, record = _transcript_options(replay_path, record_path)
    reports = run_benchmark(
        kb,
        items,
        configs,
        transcripts=transcripts,
        record=record,
        out_dir=out_dir,
        max_concurrency=int(run_config.get("max_concurrency", 1)),
    )
    emit_report(reports, out_dir)
    for report in reports:
        stats = report.correction_stats
        click.echo(
            f"{report.model_name} / {report.template_id}: "
            f"{report.correct_count}/{report.total} correct, "
            f"{stats.fixed_by_checker} fixed by checker "
            f"({stats.percent_fixed:.0f}% of wrong queries)"
        )
    click.echo(f"reports written to {out_dir}")


@main.command()
@click.option("--graph", "graph_path", required=True)
@click.option("--transforms", "transforms_path", default=None)
@click.option("--templates", "templates_dir", default=None)
@click.option("--llm-config", "llm_config_path", required=True, help="JSON listing the available models")
@click.option("--replay", "replay_path", default=None)
@click.option("--record", "record_path", default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--cors-origin", "cors_origins", multiple=True, help="allowed CORS origin (repeatable)")
@click.option("--ui-dir", default=None, help="directory of built web console assets to serve")
def serve(
    graph_path: str,
    transforms_path: str | None,
    templates_dir: str | None,
    llm_config_path: str,
    replay_path: str | None,
    record_path: str | None,
    host: str,
    port: int,
    cors_origins: tuple[str, ...],
    ui_dir: str | None,
) -> None:
    """Serve the HTTP API (and optionally the web console) over the graph."""
    import uvicorn

    from graphqa.service import create_app

    kb = _load_kb(graph_path, transforms_path)
    templates = load_templates(templates_dir)
    config = json.loads(Path(llm_config_path).read_text(encoding="utf-8"))
    models = {}
    for entry in config.get("models", []):
        llm_config = LlmConfig.from_dict(entry)
        models[llm_config.model_name] = llm_config
    if not models:
        raise click.UsageError(f"{llm_config_path}: no models configured")

    transcripts, record = _transcript_options(replay_path, record_path)
    app = create_app(
        kb,
        templates,
        models,
        transcripts=transcripts,
        record=record,
        cors_origins=list(cors_origins) or None,
        ui_dir=ui_dir,
    )
    click.echo(f"serving {kb.graph.node_count} nodes / {kb.graph.edge_count} edges on {host}:{port}")
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--out", "out_dir", required=True, help="directory to write the fixture files into")
def fixtures(out_dir: str) -> None:
    """Regenerate the deterministic fixture graph, benchmark, and transcripts."""
    from graphqa.fixtures import write_fixture_files

    paths = write_fixture_files(out_dir)
    for name in sorted(paths):
        click.echo(f"wrote {paths[name]}")


if __name__ == "__main__":
    main()
