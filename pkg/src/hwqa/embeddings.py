"""Dense context embeddings: providers, storage, cosine.

Three provider kinds produce vectors:

* ``stub`` — deterministic hash-based vectors for offline runs and tests.
* ``file`` — precomputed vectors from a JSON Lines file (manifest line
  ``{"dim": d, "model": tag, "count": n}`` followed by
  ``{"id": doc_id, "vector": [...]}`` rows).
* ``http`` — a remote service speaking ``POST /v1/embed`` with request
  ``{"texts": [...]}`` and response ``{"model", "dim", "vectors"}`` in
  request order.

The stub construction is pinned so any implementation reproduces it
bit-for-bit in IEEE-754 float64: let ``h = SHA-256(UTF-8(NFC(text)))``;
component ``k`` is ``u / (2**64 - 1) * 2 - 1`` where ``u`` is the first
8 bytes, big-endian unsigned, of ``SHA-256(h || k)`` with ``k`` encoded
as 8 bytes big-endian; the vector is then L2-normalized.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx
import numpy as np

from .corpus import Document
from .errors import (
    ConfigurationError,
    CoverageError,
    FormatError,
    ProviderContractError,
    TransportError,
)

logger = logging.getLogger(__name__)

STUB_TAG_PREFIX = "stub-sha256-d"


@dataclass
class EmbeddingMatrix:
    """Row-per-document embeddings, rows stored L2-normalized."""

    rows: np.ndarray
    norms: np.ndarray
    dim: int
    provider_tag: str
    doc_ids: list[int]

    @classmethod
    def from_raw(cls, raw: np.ndarray, provider_tag: str, doc_ids: list[int]) -> "EmbeddingMatrix":
        raw = np.asarray(raw, dtype=np.float64)
        if raw.ndim != 2 or raw.shape[0] != len(doc_ids):
            raise ProviderContractError(
                f"expected {len(doc_ids)} embedding rows, got shape {raw.shape}"
            )
        norms = np.linalg.norm(raw, axis=1)
        inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        return cls(
            rows=raw * inv[:, None],
            norms=norms,
            dim=raw.shape[1],
            provider_tag=provider_tag,
            doc_ids=list(doc_ids),
        )

    def raw_rows(self) -> np.ndarray:
        return self.rows * self.norms[:, None]


def stub_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic unit vector from the pinned hash construction."""
    if dim < 1:
        raise ValueError("embedding dimension must be >= 1")
    seed = hashlib.sha256(unicodedata.normalize("NFC", text).encode("utf-8")).digest()
    components = np.empty(dim, dtype=np.float64)
    for k in range(dim):
        digest = hashlib.sha256(seed + k.to_bytes(8, "big")).digest()
        u = int.from_bytes(digest[:8], "big")
        components[k] = u / (2**64 - 1) * 2.0 - 1.0
    norm = np.linalg.norm(components)
    if norm == 0.0:
        components[0] = 1.0
        return components
    return components / norm


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|); 0.0 if either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ConfigurationError(f"cosine dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


class StubEmbeddingProvider:
    """Test double for a sentence-embedding model."""

    kind = "stub"

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise ConfigurationError("stub embedding dim must be >= 1")
        self.dim = dim
        self.tag = f"{STUB_TAG_PREFIX}{dim}"

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.stack([stub_embed(t, self.dim) for t in texts]) if texts else np.empty((0, self.dim))


class FileEmbeddingProvider:
    """Precomputed vectors; ``embed`` passes the file's rows through in file order."""

    kind = "file"

    def __init__(self, path: str):
        self.path = path
        self._manifest, self._records = _read_embedding_file(path)
        self.dim = self._manifest["dim"]
        self.tag = self._manifest.get("model", "file")

    def embed(self, texts: list[str]) -> np.ndarray:
        if len(texts) != len(self._records):
            raise ProviderContractError(
                f"file provider holds {len(self._records)} rows, cannot embed {len(texts)} texts"
            )
        return np.asarray([vec for _, vec in self._records], dtype=np.float64)

    def rows_by_id(self) -> dict[int, np.ndarray]:
        return {doc_id: np.asarray(vec, dtype=np.float64) for doc_id, vec in self._records}


class HttpEmbeddingProvider:
    """Client for the /v1/embed wire contract.

    Batches are fetched with bounded in-flight concurrency and
    exponential-backoff retries; results are reassembled in request order
    regardless of completion order.
    """

    kind = "http"

    def __init__(
        self,
        url: str,
        batch_size: int = 32,
        concurrency: int = 4,
        retries: int = 3,
        retry_base_delay: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.url = url.rstrip("/")
        self.batch_size = max(1, batch_size)
        self.concurrency = max(1, concurrency)
        self.retries = max(1, retries)
        self.retry_base_delay = retry_base_delay
        self._client = client
        self.tag = "http"
        self.dim: int | None = None

    def _post_batch(self, texts: list[str]) -> tuple[str, list[list[float]]]:
        last_exc: Exception | None = None
        last_status: int | None = None
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.retry_base_delay * (2 ** (attempt - 1)))
            try:
                if self._client is not None:
                    response = self._client.post(f"{self.url}/v1/embed", json={"texts": texts})
                else:
                    with httpx.Client(timeout=60.0) as client:
                        response = client.post(f"{self.url}/v1/embed", json={"texts": texts})
                if response.status_code != 200:
                    last_status = response.status_code
                    last_exc = TransportError(
                        f"embedding service returned {response.status_code}",
                        attempts=attempt + 1,
                        last_status=response.status_code,
                    )
                    continue
                payload = response.json()
                vectors = payload["vectors"]
                if len(vectors) != len(texts):
                    raise ProviderContractError(
                        f"service returned {len(vectors)} vectors for {len(texts)} texts"
                    )
                return str(payload.get("model", "http")), vectors
            except (httpx.HTTPError, json.JSONDecodeError, KeyError) as exc:
                last_exc = exc
        raise TransportError(
            f"embedding request failed after {self.retries} attempts: {last_exc}",
            attempts=self.retries,
            last_status=last_status,
        )

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.empty((0, self.dim or 0))
        batches = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        if len(batches) == 1 or self.concurrency == 1:
            results = [self._post_batch(b) for b in batches]
        else:
            with ThreadPoolExecutor(max_workers=min(self.concurrency, len(batches))) as pool:
                results = list(pool.map(self._post_batch, batches))
        self.tag = results[0][0]
        vectors = [np.asarray(vec, dtype=np.float64) for _, batch in results for vec in batch]
        dims = {v.shape[0] for v in vectors}
        if len(dims) != 1:
            raise ProviderContractError(f"inconsistent embedding dimensions in response: {dims}")
        self.dim = dims.pop()
        return np.stack(vectors)


EmbeddingProvider = StubEmbeddingProvider | FileEmbeddingProvider | HttpEmbeddingProvider


def parse_provider_spec(spec: str, client: httpx.Client | None = None) -> EmbeddingProvider:
    """Parse ``stub:dim=64``, ``file:path=...`` / ``file:...``, ``http:url=...`` / a URL."""
    if spec.startswith(("http://", "https://")):
        return HttpEmbeddingProvider(spec, client=client)
    kind, _, rest = spec.partition(":")
    options = dict(part.partition("=")[::2] for part in rest.split(",") if "=" in part)
    if kind == "stub":
        return StubEmbeddingProvider(dim=int(options.get("dim", rest or "64")))
    if kind == "file":
        return FileEmbeddingProvider(options.get("path", rest))
    if kind == "http":
        if "url" not in options:
            raise ConfigurationError(f"http provider spec needs url=...: {spec!r}")
        return HttpEmbeddingProvider(options["url"], client=client)
    raise ConfigurationError(f"unknown embedding provider spec {spec!r}")


def embed_texts(provider: EmbeddingProvider, texts: list[str]) -> EmbeddingMatrix:
    """One row per input text, in input order."""
    if not texts:
        raise ConfigurationError("embed_texts requires at least one text")
    raw = provider.embed(list(texts))
    return EmbeddingMatrix.from_raw(raw, provider_tag=provider.tag, doc_ids=list(range(len(texts))))


def embed_corpus(provider: EmbeddingProvider, corpus: list[Document]) -> EmbeddingMatrix:
    matrix = embed_texts(provider, [d.text for d in corpus])
    matrix.doc_ids = [d.id for d in corpus]
    return matrix


def _read_embedding_file(path: str) -> tuple[dict, list[tuple[int, list[float]]]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"embedding file {path} is empty")
    try:
        manifest = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise FormatError(f"embedding file {path} is not valid JSON Lines: {exc}") from exc
    if "dim" not in manifest:
        raise FormatError(f"embedding file {path} manifest lacks 'dim'")
    dim = int(manifest["dim"])
    rows: list[tuple[int, list[float]]] = []
    for i, record in enumerate(records):
        if "id" not in record or "vector" not in record:
            raise FormatError(f"embedding file {path} row {i} lacks id/vector")
        vector = record["vector"]
        if len(vector) != dim:
            raise FormatError(
                f"embedding file {path} row {i} has dim {len(vector)}, manifest says {dim}"
            )
        rows.append((int(record["id"]), [float(x) for x in vector]))
    return manifest, rows


def load_embeddings(path: str, corpus: list[Document]) -> EmbeddingMatrix:
    """Load a JSONL embedding file aligned to corpus document ids."""
    manifest, records = _read_embedding_file(path)
    by_id = dict(records)
    if len(by_id) != len(records):
        raise FormatError(f"embedding file {path} contains duplicate document ids")
    wanted = [d.id for d in corpus]
    missing = [i for i in wanted if i not in by_id]
    if missing:
        raise CoverageError(
            f"embedding file {path} is missing document ids {missing}", missing_ids=missing
        )
    extra = sorted(set(by_id) - set(wanted))
    if extra:
        logger.warning("embedding file %s has %d rows for unknown ids (ignored)", path, len(extra))
    raw = np.asarray([by_id[i] for i in wanted], dtype=np.float64)
    return EmbeddingMatrix.from_raw(raw, provider_tag=manifest.get("model", "file"), doc_ids=wanted)


def save_embeddings(matrix: EmbeddingMatrix, path: str) -> None:
    raw = matrix.raw_rows()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            json.dumps({"dim": matrix.dim, "model": matrix.provider_tag, "count": len(matrix.doc_ids)})
            + "\n"
        )
        for doc_id, row in zip(matrix.doc_ids, raw):
            fh.write(json.dumps({"id": doc_id, "vector": [float(x) for x in row]}) + "\n")
