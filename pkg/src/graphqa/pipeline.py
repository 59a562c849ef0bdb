"""One traced run per question: prompt -> completion -> extraction -> repair ->
execution -> optional answer sentence.

No stage failure escapes as an exception; everything lands in the trace, and
stages after a failure are skipped. In replay mode a trace is a pure function
of (graph, question, template, transcript store).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from graphqa.checker import RepairReport, check_and_repair
from graphqa.cypher import ExtractionError, extract_cypher_block, parse_query
from graphqa.executor import ExecutionError, execute_query
from graphqa.graph import (
    EntityIndex,
    GraphSchema,
    PropertyGraph,
    build_entity_index,
    derive_schema,
    render_schema_text,
)
from graphqa.llm import (
    LlmConfig,
    LlmError,
    PromptTemplate,
    TranscriptStore,
    complete,
    load_answer_template,
    render_placeholders,
    render_prompt,
)

STAGE_LLM = "llm"
STAGE_EXTRACT = "extract"
STAGE_CHECK = "check"
STAGE_EXECUTE = "execute"
STAGE_SENTENCE = "sentence"


@dataclass(frozen=True)
class KnowledgeBase:
    """A graph prepared for question answering: schema, index, prompt text."""

    graph: PropertyGraph
    schema: GraphSchema
    index: EntityIndex
    schema_text: str

    @classmethod
    def from_graph(cls, graph: PropertyGraph) -> "KnowledgeBase":
        schema = derive_schema(graph)
        return cls(
            graph=graph,
            schema=schema,
            index=build_entity_index(graph),
            schema_text=render_schema_text(schema),
        )


@dataclass(frozen=True)
class StageFailure:
    stage: str
    message: str


@dataclass
class PipelineTrace:
    question: str
    template_id: str
    model_name: str
    rendered_prompt: str = ""
    raw_llm_output: str = ""
    extracted_cypher: str | None = None
    repair_report: RepairReport | None = None
    executed_query: str | None = None
    results: list[str] = field(default_factory=list)
    answer_sentence: str | None = None
    failure: StageFailure | None = None

    def to_json_dict(self) -> dict:
        return {
            "question": self.question,
            "template_id": self.template_id,
            "model_name": self.model_name,
            "rendered_prompt": self.rendered_prompt,
            "raw_llm_output": self.raw_llm_output,
            "extracted_cypher": self.extracted_cypher,
            "repair_report": (
                self.repair_report.to_json_dict() if self.repair_report else None
            ),
            "executed_query": self.executed_query,
            "results": list(self.results),
            "answer_sentence": self.answer_sentence,
            "failure": (
                {"stage": self.failure.stage, "message": self.failure.message}
                if self.failure
                else None
            ),
        }


def flatten_rows(rows: list[list[str]]) -> list[str]:
    """Row-major flattening of result rows into the trace's string list."""
    return [value for row in rows for value in row]


def answer_question(
    question: str,
    kb: KnowledgeBase,
    llm_config: LlmConfig,
    template: PromptTemplate,
    *,
    transcripts: TranscriptStore | None = None,
    record: bool = False,
    generate_sentence: bool = False,
    answer_template: str | None = None,
) -> PipelineTrace:
    trace = PipelineTrace(
        question=question,
        template_id=template.id,
        model_name=llm_config.model_name,
    )
    trace.rendered_prompt = render_prompt(template, kb.schema_text, question)

    try:
        trace.raw_llm_output = complete(
            llm_config, trace.rendered_prompt, transcripts=transcripts, record=record
        )
    except LlmError as exc:
        trace.failure = StageFailure(STAGE_LLM, str(exc))
        return trace

    try:
        trace.extracted_cypher = extract_cypher_block(trace.raw_llm_output)
    except ExtractionError as exc:
        trace.failure = StageFailure(STAGE_EXTRACT, str(exc))
        return trace

    trace.repair_report = check_and_repair(trace.extracted_cypher, kb.schema, kb.index)
    if trace.repair_report.unresolved:
        details = "; ".join(
            f"{d.kind}: {d.detail}" for d in trace.repair_report.unresolved
        )
        trace.failure = StageFailure(
            STAGE_CHECK, f"query has unresolved defects ({details})"
        )
        return trace

    trace.executed_query = trace.repair_report.output_query
    try:
        rows = execute_query(kb.graph, parse_query(trace.executed_query))
    except ExecutionError as exc:
        trace.executed_query = None
        trace.failure = StageFailure(STAGE_EXECUTE, str(exc))
        return trace
    trace.results = flatten_rows(rows)

    if generate_sentence:
        try:
            trace.answer_sentence = generate_answer_sentence(
                question,
                trace.results,
                llm_config,
                transcripts=transcripts,
                record=record,
                answer_template=answer_template,
            )
        except LlmError as exc:
            trace.failure = StageFailure(STAGE_SENTENCE, str(exc))
    return trace


def render_results_block(results: list[str]) -> str:
    if not results:
        return "(no results were found)"
    return "\n".join(f"- {value}" for value in results)


def generate_answer_sentence(
    question: str,
    results: list[str],
    llm_config: LlmConfig,
    *,
    transcripts: TranscriptStore | None = None,
    record: bool = False,
    answer_template: str | None = None,
) -> str:
    """Compose a one-sentence answer from the question and the result list."""
    body = answer_template if answer_template is not None else load_answer_template()
    prompt = render_placeholders(
        body, {"question": question, "results": render_results_block(results)}
    )
    return complete(llm_config, prompt, transcripts=transcripts, record=record)
