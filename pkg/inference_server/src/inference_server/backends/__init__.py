"""Model backends and the selector strings that pick them.

Embedders: ``hash:dim=256`` (deterministic feature-hashing bag of words,
offline) or ``st:model=<sentence-transformers id>``. Readers: ``lexical``
(deterministic overlap heuristic, offline; ``lexical:tag=<id>`` to vary the
reported identity) or ``hf:model=<extractive-QA checkpoint id>``.
"""

from __future__ import annotations

from .hashing import HashingEmbedder, LexicalReader


def _options(rest: str) -> dict[str, str]:
    return dict(part.partition("=")[::2] for part in rest.split(",") if "=" in part)


def make_embedder(spec: str):
    kind, _, rest = spec.partition(":")
    options = _options(rest)
    if kind == "hash":
        return HashingEmbedder(dim=int(options.get("dim", rest or "256")))
    if kind == "st":
        from .hf import TransformersEmbedder

        return TransformersEmbedder(options.get("model", rest))
    raise ValueError(f"unknown embedder spec {spec!r}")


def make_reader(spec: str):
    kind, _, rest = spec.partition(":")
    options = _options(rest)
    if kind == "lexical":
        # span/ctx knobs let an "ensemble" of lexical readers disagree,
        # standing in for differently initialized checkpoints.
        return LexicalReader(
            model_id=options.get("tag", "lexical"),
            max_span_tokens=int(options.get("span", 6)),
            neighborhood=int(options.get("ctx", 6)),
        )
    if kind == "hf":
        from .hf import TransformersReader

        return TransformersReader(options.get("model", rest))
    raise ValueError(f"unknown reader spec {spec!r}")


__all__ = ["HashingEmbedder", "LexicalReader", "make_embedder", "make_reader"]
