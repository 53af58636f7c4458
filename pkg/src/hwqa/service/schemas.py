"""Request/response models for the pipeline service.

Requests reference artifacts by server-local path; heavy outputs (indexes,
embedding files, prediction dumps) stay on disk and responses carry
summaries plus the report JSON. Response payloads for evaluation endpoints
are the report dicts produced by the pipeline jobs, passed through as-is.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class IngestRequest(BaseModel):
    dataset_path: str
    out_path: str = ""


class BuildIndexRequest(BaseModel):
    dataset_path: str
    out_dir: str
    stopwords: str = Field(default="on", pattern="^(on|off)$")
    stemmer: str = Field(default="porter", pattern="^(porter|none)$")


class EmbedRequest(BaseModel):
    index_path: str = ""
    dataset_path: str = ""
    provider: str = ""  # empty = auto (stub matching the embeddings file)
    out_path: str


class RetrieveRequest(BaseModel):
    query: str
    index_path: str = ""
    dataset_path: str = ""
    embeddings_path: str = ""
    provider: str = ""  # empty = auto (stub matching the embeddings file)
    top_n: int = Field(default=5, ge=1)
    w_tfidf: float = 0.6
    w_transformer: float = 0.4
    embed_preprocessed: bool = False
    stopwords: str = "on"
    stemmer: str = "porter"


class ScoreTripleModel(BaseModel):
    doc_id: int
    s_tfidf: float
    s_transformer: float
    s_ensemble: float


class RetrieveResponse(BaseModel):
    query: str
    query_id: str
    n_requested: int
    top: list[ScoreTripleModel]
    tfidf_query_is_zero: bool
    config_echo: dict
    timestamp: str


class EvalRetrieverRequest(BaseModel):
    dataset_path: str = ""
    index_path: str = ""
    embeddings_path: str = ""
    provider: str = ""  # empty = auto (stub matching the embeddings file)
    top_n: int = Field(default=5, ge=1)
    w_tfidf: float = 0.6
    w_transformer: float = 0.4
    embed_preprocessed: bool = False
    stopwords: str = "on"
    stemmer: str = "porter"
    jobs: int = Field(default=4, ge=1)


class EvalReaderRequest(BaseModel):
    dataset_path: str
    predictions_path: str
    similar_threshold: float = Field(default=0.5, gt=0.0, le=1.0)


class E2ERequest(BaseModel):
    dataset_path: str = ""
    index_path: str = ""
    embeddings_path: str = ""
    provider: str = ""  # empty = auto (stub matching the embeddings file)
    readers: list[str] = Field(default_factory=list, max_length=3)
    top_n: int = Field(default=5, ge=1)
    w_tfidf: float = 0.6
    w_transformer: float = 0.4
    similar_threshold: float = Field(default=0.5, gt=0.0, le=1.0)
    stopwords: str = "on"
    stemmer: str = "porter"
    embed_preprocessed: bool = False
    reader_top_k: int = Field(default=1, ge=1)
    reader_context_top_n: int = Field(default=1, ge=1)
    jobs: int = Field(default=4, ge=1)
    out_dir: str = ""


class AblationRetrieverRequest(BaseModel):
    dataset_path: str
    embeddings_path: str = ""
    provider: str = ""  # empty = auto (stub matching the embeddings file)
    top_n: int = Field(default=5, ge=1)
    jobs: int = Field(default=4, ge=1)


class AblationReaderRequest(BaseModel):
    dataset_path: str
    embeddings_path: str = ""
    provider: str = ""  # empty = auto (stub matching the embeddings file)
    readers: list[str] = Field(min_length=1, max_length=3)
    top_n: int = Field(default=5, ge=1)
    w_tfidf: float = 0.6
    w_transformer: float = 0.4
    similar_threshold: float = Field(default=0.5, gt=0.0, le=1.0)
    stopwords: str = "on"
    stemmer: str = "porter"
    reader_top_k: int = Field(default=1, ge=1)
    reader_context_top_n: int = Field(default=1, ge=1)
    jobs: int = Field(default=4, ge=1)


class ErrorBody(BaseModel):
    category: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
