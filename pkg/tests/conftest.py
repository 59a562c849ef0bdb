from __future__ import annotations

from pathlib import Path

import pytest

from graphqa.benchmark import load_benchmark
from graphqa.graph import load_graph
from graphqa.llm import LlmConfig, TranscriptStore, load_templates
from graphqa.pipeline import KnowledgeBase

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_graph():
    return load_graph(FIXTURE_DIR / "graph.json", "graph-json")


@pytest.fixture(scope="session")
def kb(fixture_graph) -> KnowledgeBase:
    return KnowledgeBase.from_graph(fixture_graph)


@pytest.fixture(scope="session")
def benchmark_items():
    return load_benchmark(FIXTURE_DIR / "benchmark.json")


@pytest.fixture(scope="session")
def templates():
    return {t.id: t for t in load_templates()}


@pytest.fixture(scope="session")
def demo_transcripts() -> TranscriptStore:
    return TranscriptStore(FIXTURE_DIR / "transcripts_demo.jsonl")


@pytest.fixture(scope="session")
def replay_config() -> LlmConfig:
    return LlmConfig(backend="replay", model_name="replay-demo")
