"""Text normalization: tokenize, drop stopwords, stem.

The pipeline is exactly ``stem(remove_stopwords(tokenize(text)))`` under the
active configuration. Tokenization is deterministic ASCII: input is
NFC-normalized and lowercased, then every maximal run of ``[a-z0-9]``
becomes a token; all other characters (including non-ASCII letters) are
boundaries.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .porter import stem_word
from .stopwords import STOPWORDS

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class PreprocessConfig:
    """Switches for the two optional stages.

    ``stopwords`` toggles removal against the shipped English list;
    ``stemmer`` is ``"porter"`` or ``"none"``.
    """

    stopwords: bool = True
    stemmer: str = "porter"

    def __post_init__(self):
        if self.stemmer not in ("porter", "none"):
            raise ValueError(f"unknown stemmer {self.stemmer!r}")

    def as_dict(self) -> dict:
        return {"stopwords": "on" if self.stopwords else "off", "stemmer": self.stemmer}

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        stop = d.get("stopwords", "on")
        if isinstance(stop, str):
            stop = stop == "on"
        return cls(stopwords=bool(stop), stemmer=d.get("stemmer", "porter"))


# Tokenize-only configuration: what a bare term-frequency baseline sees.
RAW_CONFIG = PreprocessConfig(stopwords=False, stemmer="none")


@dataclass(frozen=True)
class ProcessedText:
    tokens: tuple[str, ...]
    source_len_chars: int = 0

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on every maximal non-alphanumeric run."""
    normalized = unicodedata.normalize("NFC", text).lower()
    return _TOKEN_RE.findall(normalized)


def remove_stopwords(tokens: list[str], stopword_set: frozenset[str] = STOPWORDS) -> list[str]:
    return [t for t in tokens if t not in stopword_set]


def stem(tokens: list[str]) -> list[str]:
    return [stem_word(t) for t in tokens]


def preprocess(text: str, config: PreprocessConfig = PreprocessConfig()) -> ProcessedText:
    tokens = tokenize(text)
    if config.stopwords:
        tokens = remove_stopwords(tokens)
    if config.stemmer == "porter":
        tokens = stem(tokens)
    return ProcessedText(tokens=tuple(tokens), source_len_chars=len(text))
