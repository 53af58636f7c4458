"""TF-IDF vectorizer: fit over a tokenized corpus, transform queries.

Weighting is exactly ``TF(t,d) * IDF(t,D)`` with

    TF(t,d)  = count(t in d) / total tokens in d
    IDF(t,D) = ln( N / (1 + df(t)) )

Note the +1 sits in the denominator only, so IDF is negative for terms
present in every document (df = N gives ln(N/(N+1)) < 0) and nonzero for
terms in no document (query side). No clamping or smoothing is applied.

Raw weights are kept in a CSR matrix; an L2-row-normalized copy is stored
alongside so cosine similarity against a normalized query reduces to a
sparse dot product. Rows whose raw weights are all zero (possible when the
IDF of every term in a document is exactly zero) are kept and score 0
against every query.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import (
    DegenerateDocumentError,
    EmptyCorpusError,
    FormatError,
    IndexingError,
)
from .preprocess import PreprocessConfig, ProcessedText

INDEX_FORMAT_VERSION = 1

TokenDoc = Sequence[str]


def _tokens_of(doc) -> tuple[str, ...]:
    if isinstance(doc, ProcessedText):
        return doc.tokens
    return tuple(doc)


def term_frequency(term: str, doc_tokens: TokenDoc) -> float:
    """Relative frequency of ``term`` within the document."""
    tokens = _tokens_of(doc_tokens)
    if not tokens:
        raise DegenerateDocumentError("term frequency is undefined for an empty document")
    return tokens.count(term) / len(tokens)


def document_frequency(term: str, corpus_tokens: Sequence[TokenDoc]) -> int:
    return sum(1 for doc in corpus_tokens if term in set(_tokens_of(doc)))


def inverse_document_frequency(term: str, corpus_tokens: Sequence[TokenDoc]) -> float:
    """ln(N / (1 + df)); total for any term, including df = 0 and df = N."""
    n = len(corpus_tokens)
    if n < 1:
        raise EmptyCorpusError("IDF is undefined over an empty corpus")
    return float(np.log(n / (1.0 + document_frequency(term, corpus_tokens))))


@dataclass(frozen=True)
class SparseQueryVector:
    """Query in index term space: (column, raw weight) pairs sorted by column."""

    columns: tuple[int, ...]
    weights: tuple[float, ...]
    norm: float

    @property
    def is_zero(self) -> bool:
        return self.norm == 0.0

    def normalized(self) -> np.ndarray:
        w = np.asarray(self.weights, dtype=np.float64)
        return w / self.norm if self.norm > 0 else w


class TfIdfIndex:
    """Immutable fitted index; safe to share across threads for queries."""

    def __init__(
        self,
        terms: list[str],
        idf: np.ndarray,
        matrix: sparse.csr_matrix,
        preprocess_config: PreprocessConfig,
    ):
        self.terms = terms
        self.vocab = {t: j for j, t in enumerate(terms)}
        self.idf = idf
        self.matrix = matrix
        self.n_docs = matrix.shape[0]
        self.preprocess_config = preprocess_config
        sq = matrix.copy()
        sq.data = sq.data**2
        # Row reduction via the same sequential matvec kernel the scoring path
        # uses; sum(axis=1) reduces pairwise and can disagree in the last ulp,
        # which would split mathematically tied documents.
        self.row_norms = np.sqrt(np.asarray(sq @ np.ones(matrix.shape[1])).ravel())
        inv = np.divide(
            1.0, self.row_norms, out=np.zeros_like(self.row_norms), where=self.row_norms > 0
        )
        self.normalized = sparse.diags(inv) @ matrix
        self.normalized = sparse.csr_matrix(self.normalized)

    @property
    def vocab_size(self) -> int:
        return len(self.terms)


def fit(
    corpus: Sequence[TokenDoc | ProcessedText],
    preprocess_config: PreprocessConfig = PreprocessConfig(),
) -> TfIdfIndex:
    """Fit vocabulary, IDF vector and the document-term matrix.

    Vocabulary columns are assigned in lexicographic term order, so the
    result is independent of document order up to row permutation.
    """
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot fit a TF-IDF index over an empty corpus")
    token_lists: list[tuple[str, ...]] = []
    for i, doc in enumerate(corpus):
        tokens = _tokens_of(doc)
        if not tokens:
            raise IndexingError(f"document {i} has no tokens after preprocessing", doc_id=i)
        token_lists.append(tokens)

    terms = sorted(set().union(*map(set, token_lists)))
    col = {t: j for j, t in enumerate(terms)}
    n = len(token_lists)

    df = np.zeros(len(terms), dtype=np.float64)
    for tokens in token_lists:
        for t in set(tokens):
            df[col[t]] += 1.0
    idf = np.log(n / (1.0 + df))

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for tokens in token_lists:
        counts = Counter(tokens)
        total = len(tokens)
        for j, c in sorted((col[t], c) for t, c in counts.items()):
            indices.append(j)
            data.append((c / total) * idf[j])
        indptr.append(len(indices))

    matrix = sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), indptr),
        shape=(n, len(terms)),
    )
    return TfIdfIndex(terms=terms, idf=idf, matrix=matrix, preprocess_config=preprocess_config)


def transform_query(index: TfIdfIndex, query: TokenDoc | ProcessedText) -> SparseQueryVector:
    """Vectorize a preprocessed query with the fitted IDF.

    TF denominators count every query token (out-of-vocabulary ones
    included); OOV terms are then dropped from the vector. An all-OOV or
    empty query yields a zero vector (``is_zero``).
    """
    tokens = _tokens_of(query)
    counts = Counter(tokens)
    total = len(tokens)
    cols: list[int] = []
    weights: list[float] = []
    for j, c in sorted((index.vocab[t], n) for t, n in counts.items() if t in index.vocab):
        cols.append(j)
        weights.append((c / total) * index.idf[j])
    norm = float(np.sqrt(np.sum(np.asarray(weights, dtype=np.float64) ** 2)))
    return SparseQueryVector(columns=tuple(cols), weights=tuple(weights), norm=norm)


def cosine_scores(index: TfIdfIndex, query: SparseQueryVector) -> np.ndarray:
    """Cosine similarity of the query against every document row.

    Zero-norm rows and zero-norm queries score 0.0 by convention.
    """
    if query.is_zero:
        return np.zeros(index.n_docs, dtype=np.float64)
    qvec = np.zeros(index.vocab_size, dtype=np.float64)
    qvec[list(query.columns)] = query.normalized()
    return np.asarray(index.normalized @ qvec, dtype=np.float64).ravel()


def save_index(index: TfIdfIndex, path: str) -> None:
    """Persist as a single .npz container; round-trip is bit-exact."""
    meta = {
        "format_version": INDEX_FORMAT_VERSION,
        "n_docs": index.n_docs,
        "preprocess": index.preprocess_config.as_dict(),
    }
    with open(path, "wb") as fh:
        np.savez(
            fh,
            meta_json=np.array(json.dumps(meta, sort_keys=True)),
            vocab_json=np.array(json.dumps(index.terms)),
            idf=index.idf,
            data=index.matrix.data,
            indices=index.matrix.indices,
            indptr=index.matrix.indptr,
        )


def load_index(path: str) -> TfIdfIndex:
    try:
        with np.load(path, allow_pickle=False) as archive:
            meta = json.loads(str(archive["meta_json"]))
            if meta.get("format_version") != INDEX_FORMAT_VERSION:
                raise FormatError(
                    f"unsupported index format version {meta.get('format_version')!r}"
                )
            terms = json.loads(str(archive["vocab_json"]))
            idf = archive["idf"]
            matrix = sparse.csr_matrix(
                (archive["data"], archive["indices"], archive["indptr"]),
                shape=(meta["n_docs"], len(terms)),
            )
    except (KeyError, ValueError, OSError) as exc:
        raise FormatError(f"not a valid index file: {path} ({exc})") from exc
    return TfIdfIndex(
        terms=terms,
        idf=idf,
        matrix=matrix,
        preprocess_config=PreprocessConfig.from_dict(meta.get("preprocess", {})),
    )
