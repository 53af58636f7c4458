"""Command-line client for the pipeline service.

Every subcommand builds one request, sends it to the service (an in-process
application instance by default, or a remote server via ``--server``), and
prints the JSON response as the only stdout output. Logs go to stderr.
Configuration can come from a plain ``key=value`` file via ``--config``;
explicit flags override file values.

Exit codes: 0 success, 1 categorized pipeline/IO error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import httpx

from . import __version__

logger = logging.getLogger("hwqa.cli")


# Namespaced spellings accepted in config files alongside the flat names.
_KEY_ALIASES = {
    "preprocess.stopwords": "stopwords",
    "preprocess.stemmer": "stemmer",
    "retriever.embed_preprocessed": "embed_preprocessed",
    "retriever.w_tfidf": "w_tfidf",
    "retriever.w_transformer": "w_transformer",
    "retriever.n": "top_n",
}


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            values[_KEY_ALIASES.get(key, key)] = value.strip()
    return values


def _merge(file_values: dict[str, str], key: str, flag_value, default, cast=str):
    """Precedence: explicit flag > config file > default."""
    if flag_value is not None:
        return flag_value
    if key in file_values:
        raw = file_values[key]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _readers_from(file_values: dict[str, str], flag_value) -> list[str]:
    if flag_value:
        return list(flag_value)
    raw = file_values.get("readers", "")
    return [r.strip() for r in raw.split(",") if r.strip()]


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _post(args, path: str, payload: dict) -> int:
    with _client(args.server) as client:
        try:
            response = client.post(path, json=payload)
        except httpx.HTTPError as exc:
            print(f"error[transport]: {exc}", file=sys.stderr)
            return 1
    if response.status_code != 200:
        try:
            body = response.json()
            error = body.get("error", body)
            category = error.get("category", "http")
            message = error.get("message", json.dumps(body))
        except json.JSONDecodeError:
            category, message = "http", response.text
        print(f"error[{category}]: {message}", file=sys.stderr)
        return 1
    print(json.dumps(response.json(), indent=2, sort_keys=True))
    return 0


def _add_common_retrieval_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--index", default=None, help="index directory or .npz path")
    parser.add_argument("--dataset", default=None, help="SQuAD JSON or corpus manifest path")
    parser.add_argument("--embeddings", default=None, help="embedding JSONL path")
    parser.add_argument("--embedding-provider", default=None, dest="provider",
                        help="stub:dim=64 | file:path=... | http:url=...")
    parser.add_argument("--top-n", type=int, default=None)
    parser.add_argument("--w-tfidf", type=float, default=None)
    parser.add_argument("--w-transformer", type=float, default=None)
    parser.add_argument("--embed-preprocessed", action="store_true", default=None)
    parser.add_argument("--stopwords", choices=["on", "off"], default=None)
    parser.add_argument("--stemmer", choices=["porter", "none"], default=None)
    parser.add_argument("--jobs", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwqa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hwqa {__version__}")
    parser.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    parser.add_argument("--config", default=None, help="key=value configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a SQuAD file into a corpus manifest")
    p.add_argument("--dataset", default=None, required=False)
    p.add_argument("--out", default=None, help="manifest output path")

    index = sub.add_parser("index", help="index operations")
    index_sub = index.add_subparsers(dest="index_command", required=True)
    p = index_sub.add_parser("build", help="fit a TF-IDF index and corpus manifest")
    p.add_argument("--dataset", default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--stopwords", choices=["on", "off"], default=None)
    p.add_argument("--stemmer", choices=["porter", "none"], default=None)

    p = sub.add_parser("embed", help="embed the corpus through a provider")
    p.add_argument("--index", default=None, help="index directory (uses its corpus manifest)")
    p.add_argument("--dataset", default=None)
    p.add_argument("--embedding-provider", default=None, dest="provider")
    p.add_argument("--out", default=None, help="embedding JSONL output path")

    p = sub.add_parser("retrieve", help="rank documents for one query")
    p.add_argument("--query", default=None)
    _add_common_retrieval_flags(p)

    p = sub.add_parser("eval-retriever", help="top-k retrieval accuracy over a dataset")
    _add_common_retrieval_flags(p)

    p = sub.add_parser("eval-reader", help="score a prediction dump against gold answers")
    p.add_argument("--dataset", default=None)
    p.add_argument("--predictions", default=None)
    p.add_argument("--similar-threshold", type=float, default=None)

    p = sub.add_parser("e2e", help="full pipeline: index, embed, retrieve, read, evaluate")
    _add_common_retrieval_flags(p)
    p.add_argument("--reader", action="append", default=None,
                   help="reader spec (repeatable, up to 3): URL | stub | oracle")
    p.add_argument("--similar-threshold", type=float, default=None)
    p.add_argument("--reader-top-k", type=int, default=None)
    p.add_argument("--reader-context-top-n", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory for report artifacts")

    ablation = sub.add_parser("ablation", help="ablation report harnesses")
    ablation_sub = ablation.add_subparsers(dest="ablation_command", required=True)
    p = ablation_sub.add_parser("retriever", help="retrieval configurations table")
    p.add_argument("--dataset", default=None)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--embedding-provider", default=None, dest="provider")
    p.add_argument("--top-n", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p = ablation_sub.add_parser("reader", help="reader configurations table")
    _add_common_retrieval_flags(p)
    p.add_argument("--reader", action="append", default=None)
    p.add_argument("--similar-threshold", type=float, default=None)
    p.add_argument("--reader-top-k", type=int, default=None)
    p.add_argument("--reader-context-top-n", type=int, default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)

    return parser


def _retrieval_payload(args, cfg: dict[str, str]) -> dict:
    return {
        "index_path": _merge(cfg, "index", getattr(args, "index", None), ""),
        "dataset_path": _merge(cfg, "dataset", getattr(args, "dataset", None), ""),
        "embeddings_path": _merge(cfg, "embeddings", getattr(args, "embeddings", None), ""),
        "provider": _merge(cfg, "provider", getattr(args, "provider", None), ""),
        "top_n": _merge(cfg, "top_n", getattr(args, "top_n", None), 5, int),
        "w_tfidf": _merge(cfg, "w_tfidf", getattr(args, "w_tfidf", None), 0.6, float),
        "w_transformer": _merge(cfg, "w_transformer", getattr(args, "w_transformer", None), 0.4, float),
        "embed_preprocessed": _merge(
            cfg, "embed_preprocessed", getattr(args, "embed_preprocessed", None), False, bool
        ),
        "stopwords": _merge(cfg, "stopwords", getattr(args, "stopwords", None), "on"),
        "stemmer": _merge(cfg, "stemmer", getattr(args, "stemmer", None), "porter"),
        "jobs": _merge(cfg, "jobs", getattr(args, "jobs", None), 4, int),
    }


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)

    cfg: dict[str, str] = {}
    if args.config:
        try:
            cfg = _load_config_file(args.config)
        except (OSError, ValueError) as exc:
            print(f"error[config]: {exc}", file=sys.stderr)
            return 1

    try:
        if args.command == "serve":
            import uvicorn

            from .service import create_app

            uvicorn.run(create_app(), host=args.host, port=args.port)
            return 0

        if args.command == "ingest":
            payload = {
                "dataset_path": _merge(cfg, "dataset", args.dataset, ""),
                "out_path": _merge(cfg, "out", args.out, ""),
            }
            return _post(args, "/v1/ingest", payload)

        if args.command == "index":
            payload = {
                "dataset_path": _merge(cfg, "dataset", args.dataset, ""),
                "out_dir": _merge(cfg, "out", args.out, ""),
                "stopwords": _merge(cfg, "stopwords", args.stopwords, "on"),
                "stemmer": _merge(cfg, "stemmer", args.stemmer, "porter"),
            }
            return _post(args, "/v1/index/build", payload)

        if args.command == "embed":
            payload = {
                "index_path": _merge(cfg, "index", args.index, ""),
                "dataset_path": _merge(cfg, "dataset", args.dataset, ""),
                "provider": _merge(cfg, "provider", args.provider, ""),
                "out_path": _merge(cfg, "out", args.out, ""),
            }
            return _post(args, "/v1/embed", payload)

        if args.command == "retrieve":
            query = _merge(cfg, "query", args.query, None)
            if query is None:
                parser.error("retrieve requires --query")
            payload = _retrieval_payload(args, cfg)
            payload.pop("jobs")
            payload["query"] = query
            return _post(args, "/v1/retrieve", payload)

        if args.command == "eval-retriever":
            return _post(args, "/v1/eval/retriever", _retrieval_payload(args, cfg))

        if args.command == "eval-reader":
            payload = {
                "dataset_path": _merge(cfg, "dataset", args.dataset, ""),
                "predictions_path": _merge(cfg, "predictions", args.predictions, ""),
                "similar_threshold": _merge(
                    cfg, "similar_threshold", args.similar_threshold, 0.5, float
                ),
            }
            return _post(args, "/v1/eval/reader", payload)

        if args.command == "e2e":
            payload = _retrieval_payload(args, cfg)
            payload["readers"] = _readers_from(cfg, args.reader)
            payload["similar_threshold"] = _merge(
                cfg, "similar_threshold", args.similar_threshold, 0.5, float
            )
            payload["reader_top_k"] = _merge(cfg, "reader_top_k", args.reader_top_k, 1, int)
            payload["reader_context_top_n"] = _merge(
                cfg, "reader_context_top_n", args.reader_context_top_n, 1, int
            )
            payload["out_dir"] = _merge(cfg, "out", args.out, "")
            return _post(args, "/v1/e2e", payload)

        if args.command == "ablation":
            if args.ablation_command == "retriever":
                payload = {
                    "dataset_path": _merge(cfg, "dataset", args.dataset, ""),
                    "embeddings_path": _merge(cfg, "embeddings", args.embeddings, ""),
                    "provider": _merge(cfg, "provider", args.provider, ""),
                    "top_n": _merge(cfg, "top_n", args.top_n, 5, int),
                    "jobs": _merge(cfg, "jobs", args.jobs, 4, int),
                }
                return _post(args, "/v1/ablation/retriever", payload)
            payload = _retrieval_payload(args, cfg)
            payload.pop("index_path")
            payload.pop("embed_preprocessed")
            payload["readers"] = _readers_from(cfg, args.reader)
            payload["similar_threshold"] = _merge(
                cfg, "similar_threshold", args.similar_threshold, 0.5, float
            )
            payload["reader_top_k"] = _merge(cfg, "reader_top_k", args.reader_top_k, 1, int)
            payload["reader_context_top_n"] = _merge(
                cfg, "reader_context_top_n", args.reader_context_top_n, 1, int
            )
            return _post(args, "/v1/ablation/reader", payload)

        parser.error(f"unknown command {args.command!r}")
        return 2
    except (OSError, ValueError) as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
