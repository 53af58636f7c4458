"""Server configuration: which models to load and where to listen.

One embedding model plus up to three reader models; reader model i is
served by its own instance on ``port + i`` so every ``/v1/answer`` endpoint
binds exactly one model identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Publicly available checkpoints matching the intended model families; used
# when --preset models is given. Pure configuration: swap freely.
DEFAULT_EMBED_MODEL = "st:model=sentence-transformers/all-MiniLM-L6-v2"
DEFAULT_READER_MODELS = [
    "hf:model=bert-large-uncased-whole-word-masking-finetuned-squad",
    "hf:model=deepset/bert-large-uncased-whole-word-masking-squad2",
    "hf:model=deepset/deberta-v3-large-squad2",
]

OFFLINE_EMBED_MODEL = "hash:dim=256"
OFFLINE_READER_MODELS = ["lexical:tag=lexical-1", "lexical:tag=lexical-2", "lexical:tag=lexical-3"]


@dataclass
class ServerConfig:
    embed_model: str = OFFLINE_EMBED_MODEL
    reader_models: list[str] = field(default_factory=lambda: list(OFFLINE_READER_MODELS))
    host: str = "127.0.0.1"
    port: int = 8100
    batch_size: int = 32
    max_batch: int = 256

    def __post_init__(self):
        if not self.embed_model and not self.reader_models:
            raise ValueError("at least one model must be configured")
        if len(self.reader_models) > 3:
            raise ValueError("at most three reader models are supported")

    def reader_ports(self) -> list[int]:
        return [self.port + i for i in range(len(self.reader_models))]
