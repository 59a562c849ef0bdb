import pytest
from fastapi.testclient import TestClient

from graphqa.llm import LlmConfig
from graphqa.service import create_app

MS_QUESTION = (
    "What are the names of the drugs that are contraindicated when a patient has "
    "multiple sclerosis?"
)


@pytest.fixture(scope="module")
def client(kb, templates, demo_transcripts):
    models = {"replay-demo": LlmConfig(backend="replay", model_name="replay-demo")}
    app = create_app(
        kb, list(templates.values()), models, transcripts=demo_transcripts
    )
    return TestClient(app)


class TestHealthAndIntrospection:
    def test_health(self, client, kb):
        body = client.get("/api/health").json()
        assert body == {"status": "ok", "graph_nodes": kb.graph.node_count}

    def test_schema_text_and_triples(self, client, kb):
        body = client.get("/api/schema").json()
        assert body["text"] == kb.schema_text
        assert {"source": "drug", "relation": "contraindication", "target": "disease"} in body["triples"]
        assert len(body["labels"]) == 10

    def test_templates_listing(self, client):
        body = client.get("/api/templates").json()
        assert [t["id"] for t in body["templates"]][:2] == ["zero_shot", "one_shot"]
        assert len(body["templates"]) == 8

    def test_models_listing(self, client):
        assert client.get("/api/models").json() == {"models": ["replay-demo"]}


class TestAsk:
    def test_worked_example_trace(self, client):
        resp = client.post(
            "/api/ask",
            json={"question": MS_QUESTION, "model": "replay-demo", "template_id": "zero_shot"},
        )
        assert resp.status_code == 200
        trace = resp.json()
        assert 'd:pathway' in trace["raw_llm_output"]
        assert 'd:disease' in trace["repair_report"]["output_query"]
        assert len(trace["repair_report"]["corrections"]) == 3
        assert trace["failure"] is None
        assert "alvistrane" in trace["results"]

    def test_empty_question_is_400(self, client):
        resp = client.post(
            "/api/ask", json={"question": "  ", "model": "replay-demo", "template_id": "zero_shot"}
        )
        assert resp.status_code == 400

    def test_unknown_template_names_valid_ids(self, client):
        resp = client.post(
            "/api/ask", json={"question": "q?", "model": "replay-demo", "template_id": "imaginary"}
        )
        assert resp.status_code == 400
        assert "zero_shot" in resp.json()["detail"]

    def test_unknown_model_is_400(self, client):
        resp = client.post(
            "/api/ask", json={"question": "q?", "model": "gpt-imaginary", "template_id": "zero_shot"}
        )
        assert resp.status_code == 400

    def test_graceful_pipeline_failure_still_200(self, client):
        resp = client.post(
            "/api/ask",
            json={"question": "Unknown question", "model": "replay-demo", "template_id": "zero_shot"},
        )
        assert resp.status_code == 200
        assert resp.json()["failure"]["stage"] == "llm"

    def test_transport_level_failure_is_502(self, client, monkeypatch):
        import graphqa.service as service_module

        def explode(*args, **kwargs):
            raise RuntimeError("socket torn down mid-flight")

        monkeypatch.setattr(service_module, "answer_question", explode)
        resp = client.post(
            "/api/ask",
            json={"question": "q?", "model": "replay-demo", "template_id": "zero_shot"},
        )
        assert resp.status_code == 502

    def test_ask_is_idempotent_in_replay_mode(self, client):
        payload = {"question": MS_QUESTION, "model": "replay-demo", "template_id": "zero_shot"}
        assert client.post("/api/ask", json=payload).json() == client.post("/api/ask", json=payload).json()


class TestExecute:
    def test_cross_endpoint_consistency_with_ask(self, client):
        trace = client.post(
            "/api/ask",
            json={"question": MS_QUESTION, "model": "replay-demo", "template_id": "zero_shot"},
        ).json()
        executed = client.post(
            "/api/execute", json={"cypher": trace["executed_query"]}
        ).json()
        assert executed["results"] == trace["results"]

    def test_parse_diagnostic_is_422(self, client):
        resp = client.post("/api/execute", json={"cypher": "MATCH (a)-[:r*]->(b) RETURN b.name"})
        assert resp.status_code == 422
        detail = resp.json()["detail"]
        assert detail["type"] == "parse_error"
        assert "asterisk" in detail["message"]

    def test_validation_diagnostic_is_422(self, client):
        resp = client.post("/api/execute", json={"cypher": "MATCH (a:drug) RETURN zz.name"})
        assert resp.status_code == 422
        assert resp.json()["detail"]["type"] == "validation_error"

    def test_execute_returns_rows_and_ast(self, client):
        resp = client.post(
            "/api/execute",
            json={"cypher": 'MATCH (d:disease {name:"multiple sclerosis"}) RETURN d.name'},
        )
        body = resp.json()
        assert body["rows"] == [["multiple sclerosis"]]
        assert body["query"]["return_items"] == [{"variable": "d", "property": "name"}]

    def test_execute_never_mutates_state(self, client, kb):
        before = client.get("/api/health").json()
        client.post("/api/execute", json={"cypher": "MATCH (a:drug) RETURN a.name"})
        assert client.get("/api/health").json() == before
