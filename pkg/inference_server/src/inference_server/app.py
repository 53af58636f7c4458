"""FastAPI application for one inference instance.

An instance serves at most one embedding model and one reader model; an
ensemble of readers runs as one instance per model (the client fans out).
Responses always carry the serving model's identity.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__ as _version

logger = logging.getLogger(__name__)


class EmbedRequest(BaseModel):
    texts: list[str]


class AnswerRequest(BaseModel):
    question: str
    context: str
    top_k: int = Field(default=1, ge=1)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(embedder=None, reader=None, max_batch: int = 256) -> FastAPI:
    if embedder is None and reader is None:
        raise ValueError("an instance needs at least one model")
    app = FastAPI(title="inference-server", version=_version)

    @app.get("/v1/health")
    def health():
        models = [m.tag for m in (embedder, reader) if m is not None]
        return {"status": "ok", "models": models}

    @app.post("/v1/embed")
    def embed(request: EmbedRequest):
        if embedder is None:
            return _error(404, "no embedding model loaded on this instance")
        if not request.texts:
            return _error(400, "empty batch")
        if len(request.texts) > max_batch:
            return _error(413, f"batch of {len(request.texts)} exceeds limit {max_batch}")
        try:
            vectors = embedder.embed(request.texts)
        except Exception as exc:  # model failure -> 500 with message
            logger.exception("embedding failed")
            return _error(500, f"embedding model failure: {exc}")
        return {
            "model": embedder.tag,
            "dim": int(vectors.shape[1]),
            "vectors": [[float(x) for x in row] for row in vectors],
        }

    @app.post("/v1/answer")
    def answer(request: AnswerRequest):
        if reader is None:
            return _error(404, "no reader model loaded on this instance")
        try:
            answers = reader.answer(request.question, request.context, request.top_k)
        except Exception as exc:
            logger.exception("reader failed")
            return _error(500, f"reader model failure: {exc}")
        return {"model": reader.tag, "answers": answers}

    return app
