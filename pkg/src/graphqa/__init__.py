"""Question answering over a property graph: an LLM drafts a query in a
restricted Cypher subset, a three-stage checker repairs it against the graph
schema, an embedded executor answers it, and a benchmark harness scores the
whole pipeline."""

from graphqa.checker import RepairReport, check_and_repair
from graphqa.cypher import CypherQuery, ParseError, extract_cypher_block, parse_query, serialize_query
from graphqa.executor import execute_query
from graphqa.graph import (
    EntityIndex,
    GraphSchema,
    PropertyGraph,
    TransformConfig,
    apply_transforms,
    build_entity_index,
    derive_schema,
    load_graph,
    render_schema_text,
)
from graphqa.llm import LlmConfig, PromptTemplate, TranscriptStore, complete, load_templates, render_prompt
from graphqa.pipeline import KnowledgeBase, PipelineTrace, answer_question

__version__ = "0.1.0"

__all__ = [
    "CypherQuery",
    "EntityIndex",
    "GraphSchema",
    "KnowledgeBase",
    "LlmConfig",
    "ParseError",
    "PipelineTrace",
    "PromptTemplate",
    "PropertyGraph",
    "RepairReport",
    "TranscriptStore",
    "TransformConfig",
    "answer_question",
    "apply_transforms",
    "build_entity_index",
    "check_and_repair",
    "complete",
    "derive_schema",
    "execute_query",
    "extract_cypher_block",
    "load_graph",
    "load_templates",
    "parse_query",
    "render_prompt",
    "render_schema_text",
    "serialize_query",
]
