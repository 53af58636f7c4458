import itertools

import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

from hwqa.errors import ConfigurationError, ProviderContractError, TransportError
from hwqa.reader import (
    FirstTokensReader,
    HttpReader,
    PlantedSpanReader,
    ReaderAnswer,
    ensemble_union,
    gather_answers,
    load_predictions,
    normalize_answer,
    query_reader,
    save_predictions,
    select_primary,
)


def make_reader_service(model_id, responder):
    """Tiny reader service; ``responder(question, context, top_k)`` -> answers list."""
    app = FastAPI()

    @app.post("/v1/answer")
    def answer(payload: dict):
        answers = responder(payload["question"], payload["context"], payload["top_k"])
        return {"model": model_id, "answers": answers}

    return TestClient(app)


def echo_span(span, score=0.8):
    def responder(question, context, top_k):
        start = context.find(span)
        if start < 0:
            return []
        return [{"text": span, "start": start, "end": start + len(span), "score": score}]

    return responder


class TestNormalizeAnswer:
    def test_articles_punctuation_case(self):
        assert normalize_answer("The facilitate student learning.") == "facilitate student learning"

    def test_lowercasing(self):
        assert normalize_answer("Embezzlement") == "embezzlement"

    def test_empty(self):
        assert normalize_answer("") == ""

    def test_whitespace_collapse(self):
        assert normalize_answer("  a   the an  answer  ") == "answer"

    def test_idempotent(self):
        for text in ("The Answer!", "plain", "A  b;c"):
            once = normalize_answer(text)
            assert normalize_answer(once) == once


class TestQueryReader:
    CONTEXT = "The crime was embezzlement according to the ledger."

    def test_round_trip(self):
        client = make_reader_service("bert-1", echo_span("embezzlement"))
        answers = query_reader("http://testserver", "what crime?", self.CONTEXT, k=1, client=client)
        assert len(answers) == 1
        assert answers[0].text == "embezzlement"
        assert answers[0].model_id == "bert-1"
        assert self.CONTEXT[answers[0].start_char : answers[0].end_char] == "embezzlement"

    def test_k_limits_answers(self):
        def responder(question, context, top_k):
            return [{"text": "a", "start": None, "end": None, "score": 0.5}][:top_k]

        client = make_reader_service("m", responder)
        answers = query_reader("http://testserver", "q", self.CONTEXT, k=1, client=client)
        assert len(answers) <= 1

    def test_score_out_of_range_rejected(self):
        def responder(question, context, top_k):
            return [{"text": "x", "start": None, "end": None, "score": 1.2}]

        client = make_reader_service("m", responder)
        with pytest.raises(ProviderContractError):
            query_reader("http://testserver", "q", self.CONTEXT, k=1, client=client)

    def test_more_than_k_answers_rejected(self):
        def responder(question, context, top_k):
            return [
                {"text": "x", "start": None, "end": None, "score": 0.5},
                {"text": "y", "start": None, "end": None, "score": 0.4},
            ]

        client = make_reader_service("m", responder)
        with pytest.raises(ProviderContractError):
            query_reader("http://testserver", "q", self.CONTEXT, k=1, client=client)

    def test_unsorted_answers_rejected(self):
        def responder(question, context, top_k):
            return [
                {"text": "x", "start": None, "end": None, "score": 0.4},
                {"text": "y", "start": None, "end": None, "score": 0.9},
            ]

        client = make_reader_service("m", responder)
        with pytest.raises(ProviderContractError):
            query_reader("http://testserver", "q", self.CONTEXT, k=2, client=client)

    def test_offset_mismatch_rejected(self):
        def responder(question, context, top_k):
            return [{"text": "embezzlement", "start": 0, "end": 12, "score": 0.5}]

        client = make_reader_service("m", responder)
        with pytest.raises(ProviderContractError):
            query_reader("http://testserver", "q", self.CONTEXT, k=1, client=client)

    def test_http_error_is_transport_error(self):
        app = FastAPI()

        @app.post("/v1/answer")
        def answer(payload: dict):
            from fastapi import HTTPException

            raise HTTPException(status_code=500)

        with pytest.raises(TransportError):
            query_reader("http://testserver", "q", self.CONTEXT, k=1, client=TestClient(app))


class TestStubReaders:
    def test_first_tokens_reader(self):
        answers = FirstTokensReader().answer("q", "alpha beta gamma delta", 1)
        assert answers[0].text == "alpha beta gamma"
        assert answers[0].score == 0.9

    def test_planted_reader_finds_span(self):
        reader = PlantedSpanReader({"who?": "the butler"})
        answers = reader.answer("who?", "clearly the butler did it", 1)
        assert answers[0].text == "the butler"
        assert answers[0].start_char == 8

    def test_planted_reader_falls_back(self):
        reader = PlantedSpanReader({"who?": "the butler"})
        answers = reader.answer("who?", "no suspects here at all", 1)
        assert answers[0].score == 0.1
        assert answers[0].text == "no suspects here"


class TestEnsembleUnion:
    def answer(self, text, score, model):
        return ReaderAnswer(text=text, score=score, model_id=model)

    def test_two_distinct_answers_from_three_models(self):
        per_model = {
            "bert1": [self.answer("Embezzlement", 0.9, "bert1")],
            "bert2": [self.answer("Offences against Property Theft", 0.7, "bert2")],
            "deberta": [self.answer("Embezzlement", 0.8, "deberta")],
        }
        prediction = ensemble_union(per_model, question_id="q1")
        assert len(prediction.candidates) == 2
        best = prediction.candidates[0]
        assert best.text == "embezzlement"
        assert best.best_score == 0.9
        assert best.models == ("bert1", "deberta")

    def test_identical_answers_collapse(self):
        per_model = {
            m: [self.answer("same span", 0.5, m)] for m in ("m1", "m2", "m3")
        }
        prediction = ensemble_union(per_model)
        assert len(prediction.candidates) == 1
        assert prediction.candidates[0].models == ("m1", "m2", "m3")

    def test_degraded_ensemble_over_two_models(self):
        per_model = {
            "m1": [self.answer("x", 0.5, "m1")],
            "m3": [self.answer("y", 0.4, "m3")],
        }
        prediction = ensemble_union(per_model, failed_models=["m2"])
        assert len(prediction.candidates) == 2
        assert prediction.failed_models == ["m2"]

    def test_empty_map_rejected(self):
        with pytest.raises(ConfigurationError):
            ensemble_union({})

    def test_cardinality_bounds(self):
        per_model = {
            "m1": [self.answer("a", 0.5, "m1"), self.answer("b", 0.4, "m1")],
            "m2": [self.answer("b", 0.6, "m2")],
        }
        prediction = ensemble_union(per_model)
        total = sum(len(v) for v in per_model.values())
        assert 1 <= len(prediction.candidates) <= total
        texts = {c.text for c in prediction.candidates}
        for model, answers in per_model.items():
            assert {normalize_answer(a.text) for a in answers} <= texts

    def test_model_order_invariance(self):
        models = {
            "m1": [self.answer("a", 0.5, "m1")],
            "m2": [self.answer("b", 0.7, "m2")],
            "m3": [self.answer("a", 0.6, "m3")],
        }
        baseline = ensemble_union(models).candidates
        for ordering in itertools.permutations(models):
            shuffled = {m: models[m] for m in ordering}
            assert ensemble_union(shuffled).candidates == baseline


class TestSelectPrimary:
    def test_max_score_wins(self):
        per_model = {
            "m1": [ReaderAnswer("x", 0.9, "m1")],
            "m2": [ReaderAnswer("y", 0.7, "m2")],
            "m3": [ReaderAnswer("y", 0.6, "m3")],
        }
        assert select_primary(ensemble_union(per_model)) == "x"

    def test_contributor_count_breaks_score_tie(self):
        per_model = {
            "m1": [ReaderAnswer("solo", 0.8, "m1")],
            "m2": [ReaderAnswer("pair", 0.8, "m2")],
            "m3": [ReaderAnswer("pair", 0.8, "m3")],
        }
        assert select_primary(ensemble_union(per_model)) == "pair"

    def test_lexicographic_final_tie_break(self):
        per_model = {
            "m1": [ReaderAnswer("zebra", 0.8, "m1")],
            "m2": [ReaderAnswer("aardvark", 0.8, "m2")],
        }
        assert select_primary(ensemble_union(per_model)) == "aardvark"


class TestGatherAnswers:
    def test_failures_recorded_ensemble_proceeds(self):
        good = make_reader_service("good", echo_span("span here"))

        class FailingReader:
            name = "broken"

            def answer(self, question, context, top_k):
                raise TransportError("connection refused")

        readers = [HttpReader("http://testserver", client=good), FailingReader()]
        per_model, failures = gather_answers(readers, "q", "some span here text", k=1)
        assert failures == ["broken"]
        assert list(per_model) == ["good"]

    def test_duplicate_model_ids_kept_distinct(self):
        readers = [FirstTokensReader("twin"), FirstTokensReader("twin")]
        per_model, failures = gather_answers(readers, "q", "a b c d", k=1)
        assert failures == []
        assert sorted(per_model) == ["twin", "twin#2"]


class TestPredictionDump:
    def test_round_trip(self, tmp_path):
        per_model = {
            "m1": [ReaderAnswer("alpha beta", 0.9, "m1", 0, 10)],
            "m2": [ReaderAnswer("beta", 0.4, "m2")],
        }
        predictions = [ensemble_union(per_model, question_id="q7", failed_models=["m3"])]
        path = str(tmp_path / "preds.jsonl")
        save_predictions(predictions, path)
        loaded = load_predictions(path)
        assert loaded == predictions
