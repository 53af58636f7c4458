"""Launcher: one uvicorn server per instance, all in one process.

The base port serves the embedding model together with the first reader;
each additional reader gets its own instance on the next port, so clients
configure the ensemble as a list of URLs.
"""

from __future__ import annotations

import argparse
import asyncio
import logging

import uvicorn

from .app import create_app
from .backends import make_embedder, make_reader
from .config import (
    DEFAULT_EMBED_MODEL,
    DEFAULT_READER_MODELS,
    ServerConfig,
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inference-server", description=__doc__)
    parser.add_argument("--embed-model", default=None,
                        help="embedder spec, e.g. hash:dim=256 or st:model=<id>")
    parser.add_argument("--reader-model", action="append", default=None,
                        help="reader spec (repeatable, up to 3): lexical[:tag=x] or hf:model=<id>")
    parser.add_argument("--preset", choices=["offline", "models"], default="offline",
                        help="offline: deterministic backends; models: public checkpoints")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--max-batch", type=int, default=256)
    return parser


def config_from_args(args) -> ServerConfig:
    config = ServerConfig(host=args.host, port=args.port,
                          batch_size=args.batch_size, max_batch=args.max_batch)
    if args.preset == "models":
        config.embed_model = DEFAULT_EMBED_MODEL
        config.reader_models = list(DEFAULT_READER_MODELS)
    if args.embed_model:
        config.embed_model = args.embed_model
    if args.reader_model:
        config.reader_models = list(args.reader_model)
    return config


def build_instances(config: ServerConfig):
    """(app, port) pairs: embedder rides on the first instance."""
    embedder = make_embedder(config.embed_model) if config.embed_model else None
    readers = [make_reader(spec) for spec in config.reader_models]
    instances = []
    if not readers:
        instances.append((create_app(embedder=embedder, max_batch=config.max_batch), config.port))
        return instances
    for i, reader in enumerate(readers):
        app = create_app(
            embedder=embedder if i == 0 else None,
            reader=reader,
            max_batch=config.max_batch,
        )
        instances.append((app, config.port + i))
    return instances


async def serve_all(config: ServerConfig):
    servers = [
        uvicorn.Server(uvicorn.Config(app, host=config.host, port=port, log_level="info"))
        for app, port in build_instances(config)
    ]
    await asyncio.gather(*(server.serve() for server in servers))


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO)
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    logger.info(
        "serving embed=%s readers=%s on ports %s",
        config.embed_model, config.reader_models,
        [config.port + i for i in range(max(1, len(config.reader_models)))],
    )
    asyncio.run(serve_all(config))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
