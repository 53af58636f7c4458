"""Transformer-backed embedder and extractive reader.

Checkpoints are configuration; any sentence-transformers model id works for
embeddings and any extractive-QA checkpoint for answers. Long contexts are
handled by the tokenizer's overflow windows with the stride pinned to half
the sequence window; the pipeline maps offsets back to the original
context. Imports are local so the offline backends work without the model
extra installed.
"""

from __future__ import annotations

import numpy as np


class TransformersEmbedder:
    def __init__(self, model_id: str, device: str = "cpu", batch_size: int = 32):
        from sentence_transformers import SentenceTransformer

        self.model = SentenceTransformer(model_id, device=device)
        self.model.eval()
        self.tag = model_id
        self.dim = self.model.get_sentence_embedding_dimension()
        self.batch_size = batch_size

    def embed(self, texts: list[str]) -> np.ndarray:
        vectors = self.model.encode(
            list(texts),
            batch_size=self.batch_size,
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float64)


class TransformersReader:
    def __init__(self, model_id: str, device: str = "cpu", max_seq_len: int = 384):
        from transformers import pipeline

        self.pipe = pipeline("question-answering", model=model_id, device=device)
        self.model_id = model_id
        self.tag = model_id
        self.max_seq_len = max_seq_len
        self.doc_stride = max_seq_len // 2

    def answer(self, question: str, context: str, top_k: int) -> list[dict]:
        raw = self.pipe(
            question=question,
            context=context,
            top_k=top_k,
            max_seq_len=self.max_seq_len,
            doc_stride=self.doc_stride,
        )
        if isinstance(raw, dict):
            raw = [raw]
        answers = []
        for entry in raw[:top_k]:
            start, end = int(entry["start"]), int(entry["end"])
            if end <= start or start < 0 or end > len(context):
                continue
            # offsets are the contract anchor: text is always context[start:end]
            answers.append(
                {
                    "text": context[start:end],
                    "start": start,
                    "end": end,
                    "score": min(1.0, max(0.0, float(entry["score"]))),
                }
            )
        answers.sort(key=lambda a: -a["score"])
        return answers
