"""Reference inference service for the retrieval/QA pipeline.

Serves the two wire contracts the pipeline consumes: ``POST /v1/embed``
(sentence embeddings) and ``POST /v1/answer`` (extractive QA spans), plus
``GET /v1/health``. Model checkpoints are configuration, not code; fully
deterministic offline backends ship alongside the transformer-based ones.
"""

__version__ = "0.1.0"

from .app import create_app

__all__ = ["create_app", "__version__"]
