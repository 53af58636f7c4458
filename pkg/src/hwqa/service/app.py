"""FastAPI application exposing the pipeline as HTTP endpoints.

Package errors map to HTTP 400 with a categorized body; evaluation
endpoints return the pipeline's report JSON unchanged so the CLI can print
it verbatim.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import HwqaError
from . import schemas

logger = logging.getLogger(__name__)


def create_app() -> FastAPI:
    app = FastAPI(title="hwqa", version=__version__)

    @app.exception_handler(HwqaError)
    async def handle_hwqa_error(request: Request, exc: HwqaError):
        return JSONResponse(
            status_code=400,
            content={"error": {"category": exc.category, "message": str(exc)}},
        )

    @app.exception_handler(FileNotFoundError)
    async def handle_missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=400,
            content={"error": {"category": "io", "message": str(exc)}},
        )

    @app.get("/v1/health", response_model=schemas.HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/ingest")
    def ingest(request: schemas.IngestRequest):
        config = pipeline.RunConfig(dataset=request.dataset_path, out=request.out_path)
        return pipeline.ingest_job(config)

    @app.post("/v1/index/build")
    def build_index(request: schemas.BuildIndexRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            out=request.out_dir,
            stopwords=request.stopwords,
            stemmer=request.stemmer,
        )
        return pipeline.build_index_job(config)

    @app.post("/v1/embed")
    def embed(request: schemas.EmbedRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            index=request.index_path,
            provider=request.provider,
            out=request.out_path,
        )
        return pipeline.embed_job(config)

    @app.post("/v1/retrieve", response_model=schemas.RetrieveResponse)
    def retrieve(request: schemas.RetrieveRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            index=request.index_path,
            embeddings=request.embeddings_path,
            provider=request.provider,
            top_n=request.top_n,
            w_tfidf=request.w_tfidf,
            w_transformer=request.w_transformer,
            embed_preprocessed=request.embed_preprocessed,
            stopwords=request.stopwords,
            stemmer=request.stemmer,
        )
        return pipeline.retrieve_job(config, request.query)

    @app.post("/v1/eval/retriever")
    def eval_retriever(request: schemas.EvalRetrieverRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            index=request.index_path,
            embeddings=request.embeddings_path,
            provider=request.provider,
            top_n=request.top_n,
            w_tfidf=request.w_tfidf,
            w_transformer=request.w_transformer,
            embed_preprocessed=request.embed_preprocessed,
            stopwords=request.stopwords,
            stemmer=request.stemmer,
            jobs=request.jobs,
        )
        return pipeline.eval_retriever_job(config)

    @app.post("/v1/eval/reader")
    def eval_reader(request: schemas.EvalReaderRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            similar_threshold=request.similar_threshold,
        )
        return pipeline.eval_reader_job(config, request.predictions_path)

    @app.post("/v1/e2e")
    def e2e(request: schemas.E2ERequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            index=request.index_path,
            embeddings=request.embeddings_path,
            provider=request.provider,
            readers=request.readers,
            top_n=request.top_n,
            w_tfidf=request.w_tfidf,
            w_transformer=request.w_transformer,
            similar_threshold=request.similar_threshold,
            stopwords=request.stopwords,
            stemmer=request.stemmer,
            embed_preprocessed=request.embed_preprocessed,
            reader_top_k=request.reader_top_k,
            reader_context_top_n=request.reader_context_top_n,
            jobs=request.jobs,
            out=request.out_dir,
        )
        return pipeline.e2e_job(config)

    @app.post("/v1/ablation/retriever")
    def ablation_retriever(request: schemas.AblationRetrieverRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            embeddings=request.embeddings_path,
            provider=request.provider,
            top_n=request.top_n,
            jobs=request.jobs,
        )
        return pipeline.ablation_retriever_job(config)

    @app.post("/v1/ablation/reader")
    def ablation_reader(request: schemas.AblationReaderRequest):
        config = pipeline.RunConfig(
            dataset=request.dataset_path,
            embeddings=request.embeddings_path,
            provider=request.provider,
            readers=request.readers,
            top_n=request.top_n,
            w_tfidf=request.w_tfidf,
            w_transformer=request.w_transformer,
            similar_threshold=request.similar_threshold,
            stopwords=request.stopwords,
            stemmer=request.stemmer,
            reader_top_k=request.reader_top_k,
            reader_context_top_n=request.reader_context_top_n,
            jobs=request.jobs,
        )
        return pipeline.ablation_reader_job(config)

    return app
