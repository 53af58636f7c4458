"""HTTP service wrapping the retrieval/evaluation pipeline."""

from .app import create_app

__all__ = ["create_app"]
