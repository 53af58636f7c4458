"""Evaluation metrics: exact match, token F1, top-k retrieval accuracy.

Exact match and F1 follow the standard extractive-QA convention: answers
are normalized (lowercase, punctuation and articles removed, whitespace
collapsed), F1 is the harmonic mean of token-multiset precision and
recall, and both metrics take the best value over all gold answers. The
ensemble EM is any-match over the candidate union; the stricter
primary-candidate EM is reported alongside.

Predictions are additionally bucketed into Correct (exact match), Similar
(F1 at or above a threshold) and Incorrect, a total three-way partition.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .corpus import Dataset
from .errors import ConfigurationError, MisalignmentError
from .reader import EnsemblePrediction, normalize_answer, select_primary
from .retriever import RetrievalResult

logger = logging.getLogger(__name__)

DEFAULT_SIMILAR_THRESHOLD = 0.5


class Category(str, Enum):
    CORRECT = "correct"
    SIMILAR = "similar"
    INCORRECT = "incorrect"


def exact_match(candidates: list[str], gold_answers: list[str]) -> int:
    """1 iff any candidate equals any gold answer after normalization."""
    if not gold_answers:
        raise ConfigurationError("exact_match requires at least one gold answer")
    golds = {normalize_answer(g) for g in gold_answers}
    return int(any(normalize_answer(c) in golds for c in candidates))


def token_f1(prediction: str, gold: str) -> float:
    """Harmonic mean of token-overlap precision and recall on normalized text."""
    pred_tokens = normalize_answer(prediction).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = Counter(pred_tokens) & Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def question_f1(candidates: list[str], gold_answers: list[str]) -> float:
    """Best token F1 over all (candidate, gold) pairs; 0.0 with no candidates."""
    if not gold_answers:
        raise ConfigurationError("question_f1 requires at least one gold answer")
    if not candidates:
        return 0.0
    return max(token_f1(c, g) for c in candidates for g in gold_answers)


def categorize(
    candidates: list[str],
    gold_answers: list[str],
    similar_threshold: float = DEFAULT_SIMILAR_THRESHOLD,
) -> Category:
    if not 0.0 < similar_threshold <= 1.0:
        raise ConfigurationError(f"similar threshold must be in (0, 1], got {similar_threshold}")
    if exact_match(candidates, gold_answers):
        return Category.CORRECT
    if question_f1(candidates, gold_answers) >= similar_threshold:
        return Category.SIMILAR
    return Category.INCORRECT


def top_k_accuracy(
    results: list[RetrievalResult], gold_doc_ids: list[int], k: int
) -> float:
    """Fraction of questions whose gold document is in the first k retrievals."""
    if len(results) != len(gold_doc_ids):
        raise MisalignmentError(
            f"{len(results)} retrieval results for {len(gold_doc_ids)} gold ids"
        )
    if k < 1:
        raise ConfigurationError("top-k accuracy needs k >= 1")
    if not results:
        raise ConfigurationError("top-k accuracy over zero questions is undefined")
    hits = sum(
        1 for result, gold in zip(results, gold_doc_ids) if gold in result.doc_ids()[:k]
    )
    return hits / len(results)


@dataclass
class PerQuestionRow:
    question_id: str
    hit_rank: int | None  # 1-based rank of the gold document, None if missed
    em: int
    f1: float
    category: Category | None


@dataclass
class RetrieverReport:
    n_questions: int
    top_k: dict[int, float]
    hit_ranks: list[int | None]

    def as_dict(self) -> dict:
        return {
            "n": self.n_questions,
            "top1": self.top_k.get(1),
            "top5": self.top_k.get(5),
            "top_k": {str(k): v for k, v in sorted(self.top_k.items())},
            "hit_rank_histogram": _rank_histogram(self.hit_ranks),
        }


@dataclass
class ReaderReport:
    n_questions: int
    em: float
    f1: float
    em_primary: float
    counts: dict[str, int]
    threshold: float
    reader_failures: int = 0

    def as_dict(self) -> dict:
        return {
            "n": self.n_questions,
            "em": self.em,
            "f1": self.f1,
            "em_primary": self.em_primary,
            "counts": dict(self.counts),
            "threshold": self.threshold,
            "reader_failures": self.reader_failures,
        }


def _rank_histogram(hit_ranks: list[int | None]) -> dict[str, int]:
    histogram: dict[str, int] = {}
    for rank in hit_ranks:
        key = "miss" if rank is None else str(rank)
        histogram[key] = histogram.get(key, 0) + 1
    return histogram


def evaluate_retriever(dataset: Dataset, results: list[RetrievalResult]) -> RetrieverReport:
    """Top-1/top-5 accuracy and per-question gold hit ranks."""
    if not dataset.items:
        raise ConfigurationError("cannot evaluate a retriever over an empty dataset")
    if len(results) != len(dataset.items):
        raise MisalignmentError(
            f"{len(results)} retrieval results for {len(dataset.items)} questions"
        )
    gold = [item.gold_doc_id for item in dataset.items]
    hit_ranks: list[int | None] = []
    for result, gold_id in zip(results, gold):
        ids = result.doc_ids()
        hit_ranks.append(ids.index(gold_id) + 1 if gold_id in ids else None)
    top_k = {k: top_k_accuracy(results, gold, k) for k in (1, 5)}
    return RetrieverReport(n_questions=len(gold), top_k=top_k, hit_ranks=hit_ranks)


def evaluate_reader(
    dataset: Dataset,
    predictions: list[EnsemblePrediction],
    similar_threshold: float = DEFAULT_SIMILAR_THRESHOLD,
) -> tuple[ReaderReport, list[PerQuestionRow]]:
    """Score predictions against gold answers; missing predictions count Incorrect."""
    if not dataset.items:
        raise ConfigurationError("cannot evaluate a reader over an empty dataset")
    by_qid = {p.question_id: p for p in predictions}
    unknown = set(by_qid) - {item.question_id for item in dataset.items}
    if unknown:
        logger.warning("%d predictions reference unknown question ids (ignored)", len(unknown))

    rows: list[PerQuestionRow] = []
    counts = {Category.CORRECT: 0, Category.SIMILAR: 0, Category.INCORRECT: 0}
    em_sum = 0
    f1_sum = 0.0
    em_primary_sum = 0
    failures = 0
    for item in dataset.items:
        prediction = by_qid.get(item.question_id)
        golds = list(item.gold_answers)
        if prediction is None:
            logger.warning("no prediction for question %s; counted incorrect", item.question_id)
            candidates: list[str] = []
            primary: list[str] = []
        else:
            candidates = prediction.candidate_texts()
            primary = [select_primary(prediction)] if prediction.candidates else []
            failures += len(prediction.failed_models)
        em = exact_match(candidates, golds)
        f1 = question_f1(candidates, golds)
        category = categorize(candidates, golds, similar_threshold)
        counts[category] += 1
        em_sum += em
        f1_sum += f1
        em_primary_sum += exact_match(primary, golds)
        rows.append(
            PerQuestionRow(
                question_id=item.question_id,
                hit_rank=None,
                em=em,
                f1=f1,
                category=category,
            )
        )

    n = len(dataset.items)
    report = ReaderReport(
        n_questions=n,
        em=em_sum / n,
        f1=f1_sum / n,
        em_primary=em_primary_sum / n,
        counts={c.value: counts[c] for c in Category},
        threshold=similar_threshold,
        reader_failures=failures,
    )
    return report, rows
