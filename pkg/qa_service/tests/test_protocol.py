"""Wire-protocol conformance: every response (answered or not) must satisfy
the answer-span contract against the exact context sent, across a 20-case
fixture that includes unanswerable questions.
"""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from qa_service.app import create_app
from qa_service.model import LexicalBackend

CASES = json.loads(
    (Path(__file__).parent / "fixtures" / "qa_cases.json").read_text(encoding="utf-8")
)


def validate_wire_response(payload: dict, context: str) -> None:
    """The answer-span contract as the pipeline client enforces it."""
    assert set(payload) == {"answered", "answer", "start", "end", "score", "no_answer_score"}
    assert isinstance(payload["answered"], bool)
    assert isinstance(payload["score"], (int, float))
    assert isinstance(payload["no_answer_score"], (int, float))
    if payload["answered"]:
        assert isinstance(payload["start"], int) and isinstance(payload["end"], int)
        assert 0 <= payload["start"] < payload["end"] <= len(context)
        assert payload["answer"] == context[payload["start"] : payload["end"]]
        assert payload["answer"] != ""
    else:
        assert payload["answer"] is None
        assert payload["start"] is None and payload["end"] is None


@pytest.fixture(scope="module")
def lexical_client():
    app = create_app(backend=LexicalBackend())
    with TestClient(app) as client:
        yield client


@pytest.fixture(scope="module")
def model_client(tiny_model_dir):
    from qa_service.model import TransformersBackend

    backend = TransformersBackend(tiny_model_dir, max_seq_len=128, doc_stride=32)
    with TestClient(create_app(backend=backend)) as client:
        yield client


class TestFixtureConformance:
    def test_fixture_has_enough_unanswerable_cases(self):
        assert len(CASES) == 20
        assert sum(1 for c in CASES if not c["answerable"]) >= 5

    @pytest.mark.parametrize("case", CASES, ids=[c["id"] for c in CASES])
    def test_lexical_backend_conforms(self, lexical_client, case):
        response = lexical_client.post(
            "/v1/answer", json={"question": case["question"], "context": case["context"]}
        )
        assert response.status_code == 200
        payload = response.json()
        validate_wire_response(payload, case["context"])
        # The lexical backend is deterministic enough to pin the no-answer
        # shape on the planted unanswerable cases.
        assert payload["answered"] == case["answerable"]

    @pytest.mark.parametrize("case", CASES, ids=[c["id"] for c in CASES])
    def test_model_backend_conforms(self, model_client, case):
        response = model_client.post(
            "/v1/answer", json={"question": case["question"], "context": case["context"]}
        )
        assert response.status_code == 200
        validate_wire_response(response.json(), case["context"])


class TestEndpoints:
    def test_health_reports_model_and_cap(self, lexical_client):
        response = lexical_client.get("/v1/health")
        assert response.status_code == 200
        payload = response.json()
        assert payload["status"] == "ok"
        assert payload["model"] == "lexical"
        assert payload["max_context_chars"] > 0

    def test_empty_context_is_400(self, lexical_client):
        response = lexical_client.post("/v1/answer", json={"question": "x?", "context": ""})
        assert response.status_code == 400

    def test_missing_fields_is_400(self, lexical_client):
        response = lexical_client.post("/v1/answer", json={"question": "x?"})
        assert response.status_code == 400

    def test_non_json_body_is_400(self, lexical_client):
        response = lexical_client.post("/v1/answer", content=b"not json")
        assert response.status_code == 400

    def test_context_over_cap_is_400(self):
        app = create_app(backend=LexicalBackend(), max_context_chars=50)
        with TestClient(app) as client:
            response = client.post(
                "/v1/answer", json={"question": "q?", "context": "x" * 51}
            )
            assert response.status_code == 400

    def test_503_while_model_not_loaded(self):
        # Startup never runs when the app is used without its lifespan.
        app = create_app(backend_loader=LexicalBackend)
        client = TestClient(app)
        response = client.post("/v1/answer", json={"question": "q?", "context": "ctx"})
        assert response.status_code == 503
        health = client.get("/v1/health").json()
        assert health["status"] == "loading"

    def test_loader_runs_on_startup(self):
        app = create_app(backend_loader=LexicalBackend)
        with TestClient(app) as client:  # enters lifespan -> loads model once
            health = client.get("/v1/health").json()
            assert health["status"] == "ok" and health["model"] == "lexical"

    def test_unicode_round_trip_over_http(self, lexical_client):
        context = "Résumé \U0001f9ec note. 42 patients were admitted."
        response = lexical_client.post(
            "/v1/answer",
            json={"question": "How many patients were admitted?", "context": context},
        )
        payload = response.json()
        validate_wire_response(payload, context)
        assert payload["answered"]
