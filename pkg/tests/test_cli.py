import json

from click.testing import CliRunner

from graphqa.cli import main


def _run(args):
    runner = CliRunner()
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestBenchRun:
    def test_replay_run_end_to_end(self, fixture_dir, tmp_path):
        out = tmp_path / "out"
        result = _run(
            [
                "bench", "run",
                "--graph", str(fixture_dir / "graph.json"),
                "--questions", str(fixture_dir / "benchmark.json"),
                "--config", str(fixture_dir / "bench_config.json"),
                "--replay", str(fixture_dir / "transcripts_demo.jsonl"),
                "--out", str(out),
            ]
        )
        assert "50/50 correct" in result.output
        assert (out / "results.csv").exists()
        assert (out / "summary.md").exists()
        assert (out / "summary.json").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["configs"][0]["totals"]["correct_count"] == 50

    def test_tsv_graph_input(self, fixture_dir, tmp_path):
        out = tmp_path / "out"
        _run(
            [
                "bench", "run",
                "--graph", str(fixture_dir / "tsv"),
                "--questions", str(fixture_dir / "benchmark.json"),
                "--config", str(fixture_dir / "bench_config.json"),
                "--replay", str(fixture_dir / "transcripts_demo.jsonl"),
                "--out", str(out),
            ]
        )
        assert (out / "results.csv").exists()

    def test_replay_and_record_conflict(self, fixture_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main,
            [
                "bench", "run",
                "--graph", str(fixture_dir / "graph.json"),
                "--questions", str(fixture_dir / "benchmark.json"),
                "--config", str(fixture_dir / "bench_config.json"),
                "--replay", "a.jsonl", "--record", "b.jsonl",
                "--out", str(tmp_path),
            ],
        )
        assert result.exit_code != 0
        assert "mutually exclusive" in result.output


def test_fixtures_command_regenerates(tmp_path):
    result = _run(["fixtures", "--out", str(tmp_path / "fx")])
    assert (tmp_path / "fx" / "graph.json").exists()
    assert (tmp_path / "fx" / "benchmark.json").exists()
    assert "wrote" in result.output


def test_serve_wires_up_the_app(fixture_dir, monkeypatch):
    """Everything up to the server loop: graph + transforms + models + replay."""
    captured = {}

    def fake_run(app, host, port):
        captured["app"] = app
        captured["addr"] = (host, port)

    import uvicorn

    monkeypatch.setattr(uvicorn, "run", fake_run)
    _run(
        [
            "serve",
            "--graph", str(fixture_dir / "graph_raw.json"),
            "--transforms", str(fixture_dir / "transforms.json"),
            "--llm-config", str(fixture_dir / "llm_config.json"),
            "--replay", str(fixture_dir / "transcripts_demo.jsonl"),
            "--port", "8123",
        ]
    )
    assert captured["addr"] == ("127.0.0.1", 8123)

    from fastapi.testclient import TestClient

    client = TestClient(captured["app"])
    assert client.get("/api/health").json()["graph_nodes"] == 200
    assert client.get("/api/models").json() == {"models": ["replay-demo"]}
