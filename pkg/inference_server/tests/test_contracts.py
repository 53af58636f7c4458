import jsonschema
import pytest
from fastapi.testclient import TestClient

from inference_server.app import create_app
from inference_server.backends import HashingEmbedder, LexicalReader

from conftest import (
    ANSWER_RESPONSE_SCHEMA,
    EMBED_RESPONSE_SCHEMA,
    HEALTH_RESPONSE_SCHEMA,
)


class TestHealth:
    def test_schema_and_models(self, offline_client):
        response = offline_client.get("/v1/health")
        assert response.status_code == 200
        body = response.json()
        jsonschema.validate(body, HEALTH_RESPONSE_SCHEMA)
        assert body["status"] == "ok"
        assert "lexical-test" in body["models"]


class TestEmbedEndpoint:
    def test_response_schema_and_order(self, offline_client):
        response = offline_client.post("/v1/embed", json={"texts": ["aa", "bb", "aa"]})
        assert response.status_code == 200
        body = response.json()
        jsonschema.validate(body, EMBED_RESPONSE_SCHEMA)
        assert len(body["vectors"]) == 3
        assert body["vectors"][0] == body["vectors"][2]  # identical texts, identical rows
        assert all(len(v) == body["dim"] for v in body["vectors"])

    def test_identical_requests_identical_responses(self, offline_client):
        first = offline_client.post("/v1/embed", json={"texts": ["x", "y"]}).json()
        second = offline_client.post("/v1/embed", json={"texts": ["x", "y"]}).json()
        assert first == second

    def test_empty_batch_rejected(self, offline_client):
        response = offline_client.post("/v1/embed", json={"texts": []})
        assert response.status_code == 400

    def test_oversized_batch_gets_413(self, offline_client):
        response = offline_client.post("/v1/embed", json={"texts": ["x"] * 17})
        assert response.status_code == 413

    def test_dim_constant_across_requests(self, offline_client):
        dims = {
            offline_client.post("/v1/embed", json={"texts": [t]}).json()["dim"]
            for t in ("one", "two tokens", "three whole tokens")
        }
        assert len(dims) == 1

    def test_embed_disabled_instance(self):
        app = create_app(reader=LexicalReader())
        with TestClient(app) as client:
            assert client.post("/v1/embed", json={"texts": ["x"]}).status_code == 404


class TestAnswerEndpoint:
    CONTEXT = "Maren Holt founded the observatory on Brekke Hill in 1902."

    def test_response_schema_offsets_and_order(self, offline_client):
        response = offline_client.post(
            "/v1/answer",
            json={"question": "Who founded the observatory?", "context": self.CONTEXT, "top_k": 3},
        )
        assert response.status_code == 200
        body = response.json()
        jsonschema.validate(body, ANSWER_RESPONSE_SCHEMA)
        assert body["model"] == "lexical-test"
        assert 1 <= len(body["answers"]) <= 3
        scores = [a["score"] for a in body["answers"]]
        assert scores == sorted(scores, reverse=True)
        for answer in body["answers"]:
            assert self.CONTEXT[answer["start"] : answer["end"]] == answer["text"]

    def test_top_k_bound(self, offline_client):
        response = offline_client.post(
            "/v1/answer",
            json={"question": "Who?", "context": self.CONTEXT, "top_k": 1},
        )
        assert len(response.json()["answers"]) <= 1

    def test_deterministic(self, offline_client):
        payload = {"question": "Where is the observatory?", "context": self.CONTEXT, "top_k": 2}
        assert (
            offline_client.post("/v1/answer", json=payload).json()
            == offline_client.post("/v1/answer", json=payload).json()
        )

    def test_invalid_top_k_rejected(self, offline_client):
        response = offline_client.post(
            "/v1/answer", json={"question": "q", "context": "c", "top_k": 0}
        )
        assert response.status_code == 422

    def test_answer_disabled_instance(self):
        app = create_app(embedder=HashingEmbedder(dim=8))
        with TestClient(app) as client:
            response = client.post(
                "/v1/answer", json={"question": "q", "context": "c", "top_k": 1}
            )
            assert response.status_code == 404

    def test_model_failure_maps_to_500(self):
        class ExplodingReader:
            tag = "boom"

            def answer(self, question, context, top_k):
                raise RuntimeError("device lost")

        app = create_app(reader=ExplodingReader())
        with TestClient(app, raise_server_exceptions=False) as client:
            response = client.post(
                "/v1/answer", json={"question": "q", "context": "c", "top_k": 1}
            )
            assert response.status_code == 500
            assert "failure" in response.json()["error"]
