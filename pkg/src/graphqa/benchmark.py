"""Benchmark harness: load question sets, run the pipeline per (model,
template) configuration, score result sets, and emit CSV/Markdown/JSON
reports plus per-question trace files.

Scoring is on result sets only -- a query is correct when its normalized
result set equals the expected answer set -- so alternative query paths that
return the right entities count as correct. A question is "corrected by the
checker" when the raw extracted query scores wrong (or fails) while the
repaired query scores right; the raw query is executed separately to decide
that.
"""

from __future__ import annotations

import csv
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from graphqa.cypher import ParseError, parse_query
from graphqa.executor import ExecutionError, execute_query
from graphqa.llm import LlmConfig, PromptTemplate, TranscriptStore
from graphqa.pipeline import KnowledgeBase, PipelineTrace, answer_question, flatten_rows

STRUCTURE_HOPS = {1: 1, 2: 2, 3: 2, 4: 3, 5: 3}


class BenchmarkError(Exception):
    """A benchmark file violates the item schema."""


@dataclass(frozen=True)
class BenchmarkItem:
    id: str
    question: str
    structure: int
    hops: int
    expected_answers: frozenset[str]
    gold_cypher: str | None = None

    def __post_init__(self) -> None:
        if self.structure not in STRUCTURE_HOPS:
            raise BenchmarkError(
                f"item {self.id!r}: structure must be 1-5, got {self.structure}"
            )
        if self.hops != STRUCTURE_HOPS[self.structure]:
            raise BenchmarkError(
                f"item {self.id!r}: hops={self.hops} inconsistent with "
                f"structure={self.structure} (expected {STRUCTURE_HOPS[self.structure]})"
            )
        if not self.expected_answers:
            raise BenchmarkError(f"item {self.id!r}: expected_answers must be non-empty")
        if not self.question:
            raise BenchmarkError(f"item {self.id!r}: question must be non-empty")


def load_benchmark(path: str | Path) -> list[BenchmarkItem]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BenchmarkError(f"{path}: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise BenchmarkError(f"{path}: expected a non-empty JSON array of items")
    items = []
    seen_ids: set[str] = set()
    for i, record in enumerate(data):
        try:
            item = BenchmarkItem(
                id=str(record["id"]),
                question=record["question"],
                structure=int(record["structure"]),
                hops=int(record["hops"]),
                expected_answers=frozenset(record["expected_answers"]),
                gold_cypher=record.get("gold_cypher"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BenchmarkError(f"{path}: item #{i}: {exc}") from exc
        if item.id in seen_ids:
            raise BenchmarkError(f"{path}: duplicate item id {item.id!r}")
        seen_ids.add(item.id)
        items.append(item)
    return items


def _normalize(value: str) -> str:
    return value.strip().casefold()


def score_answer(actual: list[str], expected: frozenset[str] | set[str]) -> bool:
    """Set equality after trimming and case-folding; duplicates are irrelevant."""
    return {_normalize(v) for v in actual} == {_normalize(v) for v in expected}


@dataclass(frozen=True)
class PerQuestionResult:
    item_id: str
    hops: int
    correct: bool
    corrected_by_checker: bool
    trace_ref: str | None

    def to_json_dict(self) -> dict:
        return {
            "id": self.item_id,
            "hops": self.hops,
            "correct": self.correct,
            "corrected_by_checker": self.corrected_by_checker,
            "trace": self.trace_ref,
        }


@dataclass(frozen=True)
class CorrectionStats:
    wrong_before_checker: int
    fixed_by_checker: int

    @property
    def percent_fixed(self) -> float:
        if self.wrong_before_checker == 0:
            return 0.0
        return 100.0 * self.fixed_by_checker / self.wrong_before_checker


@dataclass
class BenchmarkReport:
    model_name: str
    template_id: str
    per_question: list[PerQuestionResult] = field(default_factory=list)
    correct_count: int = 0
    total: int = 0
    per_hop: dict[int, tuple[int, int]] = field(default_factory=dict)
    correction_stats: CorrectionStats = CorrectionStats(0, 0)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_name,
            "template": self.template_id,
            "totals": {"correct_count": self.correct_count, "total": self.total},
            "per_hop": {
                str(hops): {"correct": correct, "total": total}
                for hops, (correct, total) in sorted(self.per_hop.items())
            },
            "correction_stats": {
                "wrong_before_checker": self.correction_stats.wrong_before_checker,
                "fixed_by_checker": self.correction_stats.fixed_by_checker,
                "percent_fixed": round(self.correction_stats.percent_fixed, 2),
            },
            "per_question": [r.to_json_dict() for r in self.per_question],
        }


def _raw_query_correct(
    kb: KnowledgeBase, trace: PipelineTrace, expected: frozenset[str]
) -> bool:
    """Score the extracted query before any repair; failures score wrong."""
    if trace.extracted_cypher is None:
        return False
    try:
        rows = execute_query(kb.graph, parse_query(trace.extracted_cypher))
    except (ParseError, ExecutionError):
        return False
    return score_answer(flatten_rows(rows), expected)


def _config_slug(model_name: str, template_id: str) -> str:
    slug = f"{model_name}__{template_id}"
    return re.sub(r"[^A-Za-z0-9._-]", "-", slug)


def run_benchmark(
    kb: KnowledgeBase,
    items: list[BenchmarkItem],
    configs: list[tuple[LlmConfig, PromptTemplate]],
    *,
    transcripts: TranscriptStore | None = None,
    record: bool = False,
    out_dir: str | Path | None = None,
    max_concurrency: int = 1,
) -> list[BenchmarkReport]:
    """One report per configuration; per-question failures score as incorrect
    and never abort the run. Traces are written under ``out_dir/traces`` when
    an output directory is given."""
    if not configs:
        raise BenchmarkError("no benchmark configurations given")
    reports = []
    for llm_config, template in configs:
        report = _run_one_config(
            kb,
            items,
            llm_config,
            template,
            transcripts=transcripts,
            record=record,
            out_dir=Path(out_dir) if out_dir is not None else None,
            max_concurrency=max_concurrency,
        )
        reports.append(report)
    return reports


def _run_one_config(
    kb: KnowledgeBase,
    items: list[BenchmarkItem],
    llm_config: LlmConfig,
    template: PromptTemplate,
    *,
    transcripts: TranscriptStore | None,
    record: bool,
    out_dir: Path | None,
    max_concurrency: int,
) -> BenchmarkReport:
    def run_item(item: BenchmarkItem) -> PipelineTrace:
        return answer_question(
            item.question,
            kb,
            llm_config,
            template,
            transcripts=transcripts,
            record=record,
            generate_sentence=False,
        )

    if max_concurrency > 1:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            traces = list(pool.map(run_item, items))
    else:
        traces = [run_item(item) for item in items]

    slug = _config_slug(llm_config.model_name, template.id)
    trace_dir = None
    if out_dir is not None:
        trace_dir = out_dir / "traces" / slug
        trace_dir.mkdir(parents=True, exist_ok=True)

    per_question = []
    per_hop: dict[int, list[int]] = {}
    wrong_before = 0
    fixed = 0
    for item, trace in zip(items, traces):
        correct = trace.failure is None and score_answer(
            trace.results, item.expected_answers
        )
        raw_correct = _raw_query_correct(kb, trace, item.expected_answers)
        if not raw_correct:
            wrong_before += 1
        corrected = correct and not raw_correct
        if corrected:
            fixed += 1

        trace_ref = None
        if trace_dir is not None:
            trace_ref = f"traces/{slug}/{item.id}.json"
            (trace_dir / f"{item.id}.json").write_text(
                json.dumps(trace.to_json_dict(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )

        per_question.append(
            PerQuestionResult(
                item_id=item.id,
                hops=item.hops,
                correct=correct,
                corrected_by_checker=corrected,
                trace_ref=trace_ref,
            )
        )
        bucket = per_hop.setdefault(item.hops, [0, 0])
        bucket[1] += 1
        if correct:
            bucket[0] += 1

    return BenchmarkReport(
        model_name=llm_config.model_name,
        template_id=template.id,
        per_question=per_question,
        correct_count=sum(1 for r in per_question if r.correct),
        total=len(per_question),
        per_hop={hops: (c, t) for hops, (c, t) in per_hop.items()},
        correction_stats=CorrectionStats(wrong_before, fixed),
    )


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def emit_report(reports: list[BenchmarkReport], out_dir: str | Path) -> dict[str, Path]:
    """Write results.csv, summary.md, and summary.json. Deterministic bytes:
    rerunning on identical reports reproduces identical files."""
    if not reports:
        raise BenchmarkError("cannot emit a report for zero configurations")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    csv_path = out / "results.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "model", "template", "correct", "corrected_by_checker"])
        for report in reports:
            for result in report.per_question:
                writer.writerow(
                    [
                        result.item_id,
                        report.model_name,
                        report.template_id,
                        str(result.correct).lower(),
                        str(result.corrected_by_checker).lower(),
                    ]
                )

    json_path = out / "summary.json"
    json_path.write_text(
        json.dumps(
            {"configs": [r.to_json_dict() for r in reports]}, indent=2, sort_keys=True
        )
        + "\n",
        encoding="utf-8",
    )

    md_path = out / "summary.md"
    md_path.write_text(_render_summary_md(reports), encoding="utf-8")
    return {"results.csv": csv_path, "summary.md": md_path, "summary.json": json_path}


def _render_summary_md(reports: list[BenchmarkReport]) -> str:
    lines = ["# Benchmark summary", ""]

    lines += ["## Correct answers per configuration", ""]
    lines += ["| Model | Template | Correct | Total | Accuracy |", "|---|---|---|---|---|"]
    for r in reports:
        pct = 100.0 * r.correct_count / r.total if r.total else 0.0
        lines.append(
            f"| {r.model_name} | {r.template_id} | {r.correct_count} | {r.total} "
            f"| {pct:.1f}% |"
        )
    lines.append("")

    lines += ["## Correct answers by hop count", ""]
    all_hops = sorted({h for r in reports for h in r.per_hop})
    header = "| Model | Template | " + " | ".join(f"{h}-hop" for h in all_hops) + " |"
    lines += [header, "|---" * (2 + len(all_hops)) + "|"]
    for r in reports:
        cells = []
        for h in all_hops:
            correct, total = r.per_hop.get(h, (0, 0))
            if total:
                cells.append(f"{correct}/{total} ({100.0 * correct / total:.0f}%)")
            else:
                cells.append("-")
        lines.append(f"| {r.model_name} | {r.template_id} | " + " | ".join(cells) + " |")
    lines.append("")

    lines += ["## Wrong queries fixed by the checker", ""]
    lines += [
        "| Model | Template | Wrong before checker | Fixed by checker | Percent fixed |",
        "|---|---|---|---|---|",
    ]
    for r in reports:
        stats = r.correction_stats
        lines.append(
            f"| {r.model_name} | {r.template_id} | {stats.wrong_before_checker} "
            f"| {stats.fixed_by_checker} | {stats.percent_fixed:.0f}% |"
        )
    lines.append("")

    # model x template matrix of correct counts, in first-appearance order
    models = list(dict.fromkeys(r.model_name for r in reports))
    templates = list(dict.fromkeys(r.template_id for r in reports))
    by_key = {(r.model_name, r.template_id): r for r in reports}
    lines += ["## Template comparison (correct answers)", ""]
    lines += [
        "| LLM | " + " | ".join(templates) + " |",
        "|---" * (1 + len(templates)) + "|",
    ]
    for model in models:
        cells = []
        for template in templates:
            r = by_key.get((model, template))
            cells.append(str(r.correct_count) if r is not None else "-")
        lines.append(f"| {model} | " + " | ".join(cells) + " |")
    lines.append("")
    return "\n".join(lines)
