"""Hybrid document ranking: weighted sum of TF-IDF and embedding cosines.

Every document gets a score triple ``(s_tfidf, s_embed, s_ensemble)`` where

    s_ensemble = w_tfidf * s_tfidf + w_embed * s_embed

with default weights (0.6, 0.4). Both channel scores are cosines in
[-1, 1], so no per-channel rescaling is applied. Ties in the final ranking
break by ascending document id, which makes rankings deterministic and
oracle-checkable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tfidf
from .embeddings import EmbeddingMatrix, EmbeddingProvider
from .errors import ConfigurationError
from .preprocess import preprocess
from .tfidf import TfIdfIndex

DEFAULT_W_TFIDF = 0.6
DEFAULT_W_EMBED = 0.4


@dataclass(frozen=True)
class RetrieverConfig:
    w_tfidf: float = DEFAULT_W_TFIDF
    w_embed: float = DEFAULT_W_EMBED
    n: int = 5
    # Embed the raw query text by default; sentence encoders are trained on
    # natural text. Set True to encode the preprocessed token string instead.
    embed_preprocessed: bool = False

    def __post_init__(self):
        if self.w_tfidf < 0 or self.w_embed < 0:
            raise ConfigurationError("retrieval weights must be non-negative")
        if abs(self.w_tfidf + self.w_embed - 1.0) > 1e-9:
            raise ConfigurationError(
                f"retrieval weights must sum to 1, got {self.w_tfidf} + {self.w_embed}"
            )
        if self.n < 1:
            raise ConfigurationError("top-n must be >= 1")


@dataclass(frozen=True)
class ScoreTriple:
    doc_id: int
    s_tfidf: float
    s_embed: float
    s_ensemble: float


@dataclass(frozen=True)
class RetrievalResult:
    query_id: str
    top: tuple[ScoreTriple, ...]
    n_requested: int

    def doc_ids(self) -> list[int]:
        return [t.doc_id for t in self.top]


def combine(s_tfidf: float, s_embed: float, w_tfidf: float = DEFAULT_W_TFIDF,
            w_embed: float = DEFAULT_W_EMBED) -> float:
    return w_tfidf * s_tfidf + w_embed * s_embed


def score_all(
    query: str,
    index: TfIdfIndex,
    emb: EmbeddingMatrix,
    provider: EmbeddingProvider,
    config: RetrieverConfig = RetrieverConfig(),
) -> list[ScoreTriple]:
    """Score every document against the query through both channels."""
    if index.n_docs != len(emb.doc_ids):
        raise ConfigurationError(
            f"index has {index.n_docs} documents but embeddings cover {len(emb.doc_ids)}"
        )
    if emb.doc_ids != list(range(index.n_docs)):
        raise ConfigurationError("embedding doc ids are not aligned with index rows")

    query_tokens = preprocess(query, index.preprocess_config)
    qv = tfidf.transform_query(index, query_tokens)
    tfidf_scores = tfidf.cosine_scores(index, qv)

    embed_text = " ".join(query_tokens.tokens) if config.embed_preprocessed else query
    query_vec = np.asarray(provider.embed([embed_text])[0], dtype=np.float64)
    if query_vec.shape[0] != emb.dim:
        raise ConfigurationError(
            f"query embedding dim {query_vec.shape[0]} != corpus embedding dim {emb.dim}"
        )
    # Rows are stored L2-normalized (zero rows stay zero), so the cosine is a
    # row-wise dot with the unit query. Computed as multiply+reduce rather
    # than BLAS matvec: identical rows must get bitwise-identical scores
    # (gemv kernels vary the accumulation order with row alignment), or the
    # doc-id tie-break would see phantom score differences.
    qn = np.linalg.norm(query_vec)
    if qn == 0.0:
        embed_scores = np.zeros(index.n_docs, dtype=np.float64)
    else:
        embed_scores = (emb.rows * (query_vec / qn)).sum(axis=1)

    ensemble = config.w_tfidf * tfidf_scores + config.w_embed * embed_scores
    return [
        ScoreTriple(
            doc_id=i,
            s_tfidf=float(tfidf_scores[i]),
            s_embed=float(embed_scores[i]),
            s_ensemble=float(ensemble[i]),
        )
        for i in range(index.n_docs)
    ]


def top_n(scores: list[ScoreTriple], n: int, query_id: str = "") -> RetrievalResult:
    """The n highest ensemble scores, descending; ties break by ascending doc id."""
    if n < 1:
        raise ConfigurationError("top-n must be >= 1")
    ranked = sorted(scores, key=lambda t: (-t.s_ensemble, t.doc_id))
    return RetrievalResult(query_id=query_id, top=tuple(ranked[:n]), n_requested=n)


def retrieve(
    query: str,
    index: TfIdfIndex,
    emb: EmbeddingMatrix,
    provider: EmbeddingProvider,
    config: RetrieverConfig = RetrieverConfig(),
    query_id: str = "",
) -> RetrievalResult:
    return top_n(score_all(query, index, emb, provider, config), config.n, query_id=query_id)


def result_to_dict(query: str, result: RetrievalResult) -> dict:
    return {
        "query": query,
        "query_id": result.query_id,
        "n_requested": result.n_requested,
        "top": [
            {
                "doc_id": t.doc_id,
                "s_tfidf": t.s_tfidf,
                "s_transformer": t.s_embed,
                "s_ensemble": t.s_ensemble,
            }
            for t in result.top
        ],
    }
