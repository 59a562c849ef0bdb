"""Read-only HTTP API over the pipeline, consumed by the web console and
programmatic clients.

Endpoints (JSON, UTF-8):

* ``POST /api/ask``      -- run the full pipeline for a question, return the trace
* ``POST /api/execute``  -- execute raw query text; 422 with a diagnostic on
  parse/validation failure
* ``GET  /api/schema``   -- rendered schema text plus structured triples
* ``GET  /api/templates`` / ``GET /api/models`` -- what the server is configured with
* ``GET  /api/health``   -- liveness plus graph size

The graph, schema, index, and templates are immutable; nothing here mutates
state, so any call sequence leaves the server unchanged. The trace payload
shape is the pipeline's ``PipelineTrace.to_json_dict`` with the query AST's
JSON projection available via ``POST /api/execute`` (``patterns`` as arrays of
alternating node/rel objects, ``return_items`` as ``{variable, property}``).
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from graphqa.cypher import ParseError, parse_query, query_to_json
from graphqa.executor import ExecutionError, execute_query
from graphqa.llm import LlmConfig, PromptTemplate, TranscriptStore
from graphqa.pipeline import KnowledgeBase, answer_question, flatten_rows


class AskRequest(BaseModel):
    question: str
    model: str
    template_id: str = "zero_shot"
    generate_sentence: bool = False


class ExecuteRequest(BaseModel):
    cypher: str


def create_app(
    kb: KnowledgeBase,
    templates: list[PromptTemplate],
    models: dict[str, LlmConfig],
    *,
    transcripts: TranscriptStore | None = None,
    record: bool = False,
    cors_origins: list[str] | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="graphqa")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    templates_by_id = {t.id: t for t in templates}

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "graph_nodes": kb.graph.node_count}

    @app.get("/api/schema")
    def schema() -> dict:
        return {
            "text": kb.schema_text,
            "labels": sorted(kb.schema.node_labels),
            "triples": [
                {"source": src, "relation": rel, "target": dst}
                for src, rel, dst in sorted(kb.schema.relation_triples)
            ],
            "bidirectional_self_relations": sorted(kb.schema.self_bidirectional),
        }

    @app.get("/api/templates")
    def list_templates() -> dict:
        return {"templates": [{"id": t.id} for t in templates]}

    @app.get("/api/models")
    def list_models() -> dict:
        return {"models": sorted(models)}

    @app.post("/api/ask")
    def ask(request: AskRequest) -> dict:
        if not request.question.strip():
            raise HTTPException(status_code=400, detail="question must be non-empty")
        template = templates_by_id.get(request.template_id)
        if template is None:
            raise HTTPException(
                status_code=400,
                detail=(
                    f"unknown template_id {request.template_id!r}; "
                    f"valid ids: {sorted(templates_by_id)}"
                ),
            )
        llm_config = models.get(request.model)
        if llm_config is None:
            raise HTTPException(
                status_code=400,
                detail=f"unknown model {request.model!r}; configured: {sorted(models)}",
            )
        try:
            trace = answer_question(
                request.question,
                kb,
                llm_config,
                template,
                transcripts=transcripts,
                record=record,
                generate_sentence=request.generate_sentence,
            )
        except Exception as exc:  # pipeline failures degrade into the trace;
            # anything escaping it is a transport-level problem
            raise HTTPException(status_code=502, detail=str(exc))
        return trace.to_json_dict()

    @app.post("/api/execute")
    def execute(request: ExecuteRequest) -> dict:
        try:
            query = parse_query(request.cypher)
        except ParseError as exc:
            raise HTTPException(
                status_code=422,
                detail={"type": "parse_error", "message": str(exc), "position": exc.position},
            )
        try:
            rows = execute_query(kb.graph, query)
        except ExecutionError as exc:
            raise HTTPException(
                status_code=422,
                detail={"type": "validation_error", "message": str(exc)},
            )
        return {
            "query": query_to_json(query),
            "rows": rows,
            "results": flatten_rows(rows),
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
