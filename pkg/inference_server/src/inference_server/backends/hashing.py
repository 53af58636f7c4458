"""Deterministic offline backends: feature-hashing embedder, lexical reader.

These stand in for transformer checkpoints where none can be loaded. Both
are pure functions of their inputs, so responses are reproducible
bit-for-bit, and both honor the same response invariants as the model
backends (ordered vectors, scores in [0, 1] descending, exact offsets).
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from ..windowing import char_windows

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class HashingEmbedder:
    """Bag-of-words embedding via the hashing trick.

    Each token hashes to a signed bucket; token-sharing texts land near each
    other in cosine space, which keeps retrieval behavior meaningful without
    any learned weights.
    """

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError("embedding dim must be >= 1")
        self.dim = dim
        self.tag = f"hashing-bow-{dim}"

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            for token in _tokens(text):
                digest = hashlib.sha256(b"hash-embed:" + token.encode("utf-8")).digest()
                bucket = int.from_bytes(digest[:8], "big") % self.dim
                sign = 1.0 if digest[8] % 2 == 0 else -1.0
                out[i, bucket] += sign
            norm = np.linalg.norm(out[i])
            if norm > 0:
                out[i] /= norm
        return out


# Function words: ignored when matching a span's neighborhood against the
# question (otherwise ubiquitous tokens like "the" dominate) and trimmed
# from span edges so candidates start and end on content.
_QUESTION_STOPWORDS = frozenset(
    """
    a an the is are was were be been do does did what who whom whose when
    where which why how of in on at to for by with and or many much it its
    his her their they this that these those from as but until till all
    """.split()
)


def _match_norm(token: str) -> str:
    """Crude suffix strip so inflected forms match (used ~ use, locks ~ lock)."""
    for suffix in ("ing", "ed", "es", "s", "d"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


class LexicalReader:
    """Extractive span heuristic: answers live next to question words.

    Candidate spans are short token n-grams. Each is scored by the
    distance-decayed overlap between its neighborhood and the question's
    content words (closer matches count more, 1/d), discounted when the
    span itself repeats question words (answers rarely do). Long contexts
    are scored in overlapping character windows (stride = half window) and
    offsets are mapped back to the full context. Always returns at least
    one span for a non-empty context so ensembles never starve.
    """

    def __init__(
        self,
        model_id: str = "lexical",
        max_context_chars: int = 4000,
        max_span_tokens: int = 6,
        neighborhood: int = 6,
    ):
        self.model_id = model_id
        self.tag = model_id
        self.max_context_chars = max_context_chars
        self.max_span_tokens = max_span_tokens
        self.neighborhood = neighborhood

    def answer(self, question: str, context: str, top_k: int) -> list[dict]:
        question_tokens = {
            _match_norm(t) for t in _tokens(question) if t not in _QUESTION_STOPWORDS
        }
        by_span: dict[tuple[int, int], tuple[float, str]] = {}
        for offset, chunk in char_windows(context, self.max_context_chars):
            for start, end, text, score in self._score_window(chunk, question_tokens):
                key = (offset + start, offset + end)
                if key not in by_span or score > by_span[key][0]:
                    by_span[key] = (score, text)

        ranked = sorted(
            ((score, start, end, text) for (start, end), (score, text) in by_span.items()),
            key=lambda item: (-item[0], item[1], item[2] - item[1]),
        )
        # one candidate per content core: "the engineer" and "engineer" collapse
        answers: list[dict] = []
        seen_cores: set[tuple[str, ...]] = set()
        for score, start, end, text in ranked:
            if score <= 0.0 or len(answers) >= top_k:
                break
            core = tuple(
                _match_norm(t) for t in _tokens(text) if t not in _QUESTION_STOPWORDS
            )
            if core in seen_cores:
                continue
            seen_cores.add(core)
            answers.append({"text": text, "start": start, "end": end, "score": score})
        if not answers:
            fallback = self._fallback_span(context)
            if fallback is not None:
                answers = [fallback]
        return answers

    def _score_window(self, chunk: str, question_tokens: set[str]):
        lowered = chunk.lower()
        matches = list(_TOKEN_RE.finditer(lowered))
        n = len(matches)
        if question_tokens:
            k = min(len(question_tokens), 2 * self.neighborhood)
            max_decay = sum(1.0 / d for d in range(1, k + 1))
        else:
            max_decay = 0.0

        # spans do not cross sentence-final punctuation
        boundary_after = [
            idx + 1 < n
            and any(ch in ".!?;" for ch in lowered[matches[idx].end() : matches[idx + 1].start()])
            for idx in range(n)
        ]

        for i in range(n):
            if matches[i].group() in _QUESTION_STOPWORDS:
                continue
            for j in range(i + 1, min(i + 1 + self.max_span_tokens, n + 1)):
                if j > i + 1 and boundary_after[j - 2]:
                    break
                if matches[j - 1].group() in _QUESTION_STOPWORDS:
                    continue  # spans end on content words
                span_tokens = {_match_norm(m.group()) for m in matches[i:j]}
                decayed = 0.0
                if max_decay:
                    decayed = self._side_decay(matches, i - 1, -1, question_tokens)
                    decayed += self._side_decay(matches, j, +1, question_tokens)
                ctx_score = min(1.0, decayed / max_decay) if max_decay else 0.0
                span_q_frac = len(span_tokens & question_tokens) / len(span_tokens)
                score = ctx_score * (1.0 - 0.5 * span_q_frac)
                start = matches[i].start()
                end = matches[j - 1].end()
                yield start, end, chunk[start:end], score

    def _side_decay(self, matches, start_idx, step, question_tokens):
        """Distance-decayed question-word matches walking one direction.

        Distance counts content tokens only, so function words between the
        span and a question word do not dilute the signal.
        """
        total = 0.0
        seen: set[str] = set()
        distance = 0
        idx = start_idx
        while 0 <= idx < len(matches) and distance < self.neighborhood:
            token = matches[idx].group()
            if token not in _QUESTION_STOPWORDS:
                distance += 1
                normalized = _match_norm(token)
                if normalized in question_tokens and normalized not in seen:
                    seen.add(normalized)
                    total += 1.0 / distance
            idx += step
        return total

    def _fallback_span(self, context: str) -> dict | None:
        matches = list(_TOKEN_RE.finditer(context.lower()))
        if not matches:
            return None
        start = matches[0].start()
        end = matches[min(3, len(matches) - 1)].end()
        return {"text": context[start:end], "start": start, "end": end, "score": 0.01}
