"""Span-prediction ensemble over multiple extractive reader services.

Each reader model is queried with (question, context) and returns up to k
candidate spans scored by joint start/end probability. The ensemble keeps
the union of all models' answers, deduplicated by normalized text, with the
best score and the set of contributing models per candidate. A failing
endpoint degrades the ensemble instead of aborting it; failures are carried
on the prediction for reporting.

Wire contract: ``POST /v1/answer`` with ``{"question", "context", "top_k"}``
returning ``{"model": id, "answers": [{"text", "start", "end", "score"}]}``
sorted descending by score.
"""

from __future__ import annotations

import json
import logging
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from .errors import ConfigurationError, ProviderContractError, TransportError

logger = logging.getLogger(__name__)

_ARTICLES_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop articles, collapse whitespace."""
    text = text.lower().translate(_PUNCT_TABLE)
    text = _ARTICLES_RE.sub(" ", text)
    return " ".join(text.split())


@dataclass(frozen=True)
class ReaderAnswer:
    text: str
    score: float
    model_id: str
    start_char: int | None = None
    end_char: int | None = None


@dataclass(frozen=True)
class Candidate:
    text: str  # normalized
    best_score: float
    models: tuple[str, ...]


@dataclass
class EnsemblePrediction:
    question_id: str
    per_model: dict[str, list[ReaderAnswer]]
    candidates: list[Candidate]
    failed_models: list[str] = field(default_factory=list)

    def candidate_texts(self) -> list[str]:
        return [c.text for c in self.candidates]


def _validate_answer(entry: dict, context: str, model_id: str) -> ReaderAnswer:
    try:
        text = str(entry["text"])
        score = float(entry["score"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProviderContractError(f"reader {model_id} returned a malformed answer: {entry!r}") from exc
    if not 0.0 <= score <= 1.0:
        raise ProviderContractError(
            f"reader {model_id} returned score {score} outside [0, 1]"
        )
    start = entry.get("start")
    end = entry.get("end")
    if start is not None and end is not None:
        start, end = int(start), int(end)
        if start < 0 or end <= start:
            raise ProviderContractError(
                f"reader {model_id} returned invalid span offsets [{start}, {end})"
            )
        if context[start:end] != text:
            raise ProviderContractError(
                f"reader {model_id} span offsets do not cover the answer text"
            )
    else:
        start = end = None
    return ReaderAnswer(text=text, score=score, model_id=model_id, start_char=start, end_char=end)


def query_reader(
    endpoint: str,
    question: str,
    context: str,
    k: int = 1,
    client: httpx.Client | None = None,
) -> list[ReaderAnswer]:
    """Fetch up to k answers from one reader service endpoint."""
    if k < 1:
        raise ConfigurationError("reader top_k must be >= 1")
    url = endpoint.rstrip("/") + "/v1/answer"
    payload = {"question": question, "context": context, "top_k": k}
    try:
        if client is not None:
            response = client.post(url, json=payload)
        else:
            with httpx.Client(timeout=120.0) as own:
                response = own.post(url, json=payload)
    except httpx.HTTPError as exc:
        raise TransportError(f"reader request to {endpoint} failed: {exc}") from exc
    if response.status_code != 200:
        raise TransportError(
            f"reader {endpoint} returned {response.status_code}",
            last_status=response.status_code,
        )
    try:
        body = response.json()
        model_id = str(body["model"])
        raw_answers = body["answers"]
    except (json.JSONDecodeError, KeyError) as exc:
        raise ProviderContractError(f"reader {endpoint} response is malformed: {exc}") from exc
    if len(raw_answers) > k:
        raise ProviderContractError(
            f"reader {model_id} returned {len(raw_answers)} answers for top_k={k}"
        )
    answers = [_validate_answer(entry, context, model_id) for entry in raw_answers]
    scores = [a.score for a in answers]
    if scores != sorted(scores, reverse=True):
        raise ProviderContractError(f"reader {model_id} answers are not sorted by score")
    return answers


class HttpReader:
    """Client wrapper binding an endpoint URL to the reader contract."""

    def __init__(self, endpoint: str, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.name = endpoint
        self._client = client

    def answer(self, question: str, context: str, top_k: int) -> list[ReaderAnswer]:
        return query_reader(self.endpoint, question, context, k=top_k, client=self._client)


class FirstTokensReader:
    """Stub reader: the first three whitespace tokens of the context, score 0.9."""

    def __init__(self, model_id: str = "stub-first-tokens"):
        self.name = model_id

    def answer(self, question: str, context: str, top_k: int) -> list[ReaderAnswer]:
        tokens = context.split()
        text = " ".join(tokens[:3])
        start = context.find(text) if text else None
        end = start + len(text) if start is not None and start >= 0 else None
        if start is not None and start < 0:
            start = end = None
        return [
            ReaderAnswer(text=text, score=0.9, model_id=self.name, start_char=start, end_char=end)
        ]


class PlantedSpanReader:
    """Stub reader that returns a known answer span when it occurs in the context.

    ``answers`` maps question text to the span that should be found. When the
    span is absent from the context the reader degrades to the first three
    context tokens with a low score, like a confidently wrong model.
    """

    def __init__(self, answers: dict[str, str], model_id: str = "stub-planted"):
        self.answers = answers
        self.name = model_id
        self._fallback = FirstTokensReader(model_id=model_id)

    def answer(self, question: str, context: str, top_k: int) -> list[ReaderAnswer]:
        span = self.answers.get(question)
        if span is not None:
            start = context.find(span)
            if start >= 0:
                return [
                    ReaderAnswer(
                        text=span,
                        score=0.95,
                        model_id=self.name,
                        start_char=start,
                        end_char=start + len(span),
                    )
                ]
        fallback = self._fallback.answer(question, context, top_k)
        return [
            ReaderAnswer(
                text=a.text, score=0.1, model_id=self.name,
                start_char=a.start_char, end_char=a.end_char,
            )
            for a in fallback
        ]


def gather_answers(
    readers: list,
    question: str,
    context: str,
    k: int = 1,
    max_workers: int = 3,
) -> tuple[dict[str, list[ReaderAnswer]], list[str]]:
    """Query all readers concurrently; collect per-model answers and failures."""
    per_model: dict[str, list[ReaderAnswer]] = {}
    failures: list[str] = []
    with ThreadPoolExecutor(max_workers=max(1, min(max_workers, len(readers)))) as pool:
        futures = [(r, pool.submit(r.answer, question, context, k)) for r in readers]
        for reader, future in futures:
            try:
                answers = future.result()
            except (TransportError, ProviderContractError) as exc:
                logger.warning("reader %s failed: %s", reader.name, exc)
                failures.append(reader.name)
                continue
            model_id = answers[0].model_id if answers else reader.name
            base, suffix = model_id, 2
            while model_id in per_model:
                model_id = f"{base}#{suffix}"
                suffix += 1
            per_model[model_id] = answers
    return per_model, failures


def ensemble_union(
    per_model: dict[str, list[ReaderAnswer]],
    question_id: str = "",
    failed_models: list[str] | None = None,
) -> EnsemblePrediction:
    """Union of model answers keyed by normalized text.

    Candidates are ordered by (best score desc, contributor count desc,
    text asc), so the first candidate is the primary selection.
    """
    if not per_model:
        raise ConfigurationError("ensemble requires answers from at least one model")
    best: dict[str, float] = {}
    contributors: dict[str, set[str]] = {}
    for model_id in sorted(per_model):
        for answer in per_model[model_id]:
            key = normalize_answer(answer.text)
            if key not in best or answer.score > best[key]:
                best[key] = answer.score
            contributors.setdefault(key, set()).add(model_id)
    candidates = [
        Candidate(text=text, best_score=best[text], models=tuple(sorted(contributors[text])))
        for text in best
    ]
    candidates.sort(key=lambda c: (-c.best_score, -len(c.models), c.text))
    return EnsemblePrediction(
        question_id=question_id,
        per_model=dict(per_model),
        candidates=candidates,
        failed_models=list(failed_models or []),
    )


def select_primary(prediction: EnsemblePrediction) -> str:
    """Single displayed answer: max score, then most contributors, then lex order."""
    if not prediction.candidates:
        raise ConfigurationError("prediction has no candidates")
    return prediction.candidates[0].text


def prediction_to_dict(prediction: EnsemblePrediction) -> dict:
    return {
        "question_id": prediction.question_id,
        "candidates": [
            {"text": c.text, "best_score": c.best_score, "models": list(c.models)}
            for c in prediction.candidates
        ],
        "per_model": {
            model: [
                {
                    "text": a.text,
                    "score": a.score,
                    "start": a.start_char,
                    "end": a.end_char,
                }
                for a in answers
            ]
            for model, answers in prediction.per_model.items()
        },
        "failed_models": prediction.failed_models,
    }


def prediction_from_dict(d: dict) -> EnsemblePrediction:
    per_model = {
        model: [
            ReaderAnswer(
                text=a["text"],
                score=a["score"],
                model_id=model,
                start_char=a.get("start"),
                end_char=a.get("end"),
            )
            for a in answers
        ]
        for model, answers in d.get("per_model", {}).items()
    }
    candidates = [
        Candidate(text=c["text"], best_score=c["best_score"], models=tuple(c["models"]))
        for c in d["candidates"]
    ]
    return EnsemblePrediction(
        question_id=d["question_id"],
        per_model=per_model,
        candidates=candidates,
        failed_models=list(d.get("failed_models", [])),
    )


def save_predictions(predictions: list[EnsemblePrediction], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for prediction in predictions:
            fh.write(json.dumps(prediction_to_dict(prediction), ensure_ascii=False) + "\n")


def load_predictions(path: str) -> list[EnsemblePrediction]:
    predictions = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                predictions.append(prediction_from_dict(json.loads(line)))
    return predictions
