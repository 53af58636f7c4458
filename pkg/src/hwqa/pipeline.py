"""End-to-end jobs: build artifacts, retrieve, evaluate, run ablations.

Each job function takes explicit paths plus configuration, does the work
through the core modules, and returns a JSON-serializable report dict that
embeds the full effective configuration and the package version. Reports
are deterministic for identical inputs and configuration, except for the
``timestamp`` field.
"""

from __future__ import annotations

import csv
import datetime
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from . import __version__, metrics, reader, retriever, tfidf
from .corpus import Dataset, build_corpus, load_manifest, parse_squad_file, save_manifest
from .embeddings import (
    EmbeddingMatrix,
    embed_corpus,
    load_embeddings,
    parse_provider_spec,
    save_embeddings,
)
from .errors import ConfigurationError
from .preprocess import PreprocessConfig, preprocess
from .reader import FirstTokensReader, HttpReader, PlantedSpanReader
from .retriever import RetrieverConfig

INDEX_FILENAME = "index.npz"
CORPUS_FILENAME = "corpus.json"


DEFAULT_PROVIDER_SPEC = "stub:dim=64"


@dataclass
class RunConfig:
    """Effective configuration echoed verbatim into every report.

    An empty ``provider`` means auto: a stub provider whose dimension
    matches the embeddings file when one is given, else the default stub.
    The resolved spec is what gets echoed.
    """

    dataset: str = ""
    index: str = ""
    embeddings: str = ""
    provider: str = ""
    readers: list[str] = field(default_factory=list)
    w_tfidf: float = retriever.DEFAULT_W_TFIDF
    w_transformer: float = retriever.DEFAULT_W_EMBED
    top_n: int = 5
    similar_threshold: float = metrics.DEFAULT_SIMILAR_THRESHOLD
    stopwords: str = "on"
    stemmer: str = "porter"
    embed_preprocessed: bool = False
    reader_top_k: int = 1
    reader_context_top_n: int = 1
    jobs: int = 4
    out: str = ""

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(stopwords=self.stopwords == "on", stemmer=self.stemmer)

    def retriever_config(self) -> RetrieverConfig:
        return RetrieverConfig(
            w_tfidf=self.w_tfidf,
            w_embed=self.w_transformer,
            n=self.top_n,
            embed_preprocessed=self.embed_preprocessed,
        )

    def echo(self) -> dict:
        return {
            "dataset": self.dataset,
            "index": self.index,
            "embeddings": self.embeddings,
            "provider": self.provider,
            "readers": list(self.readers),
            "w_tfidf": self.w_tfidf,
            "w_transformer": self.w_transformer,
            "top_n": self.top_n,
            "similar_threshold": self.similar_threshold,
            "preprocess": {"stopwords": self.stopwords, "stemmer": self.stemmer},
            "embed_preprocessed": self.embed_preprocessed,
            "reader_top_k": self.reader_top_k,
            "reader_context_top_n": self.reader_context_top_n,
            "jobs": self.jobs,
            "out": self.out,
            "version": __version__,
        }


def _stamp(report: dict, config: RunConfig) -> dict:
    report["config_echo"] = config.echo()
    report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return report


def _index_paths(path: str) -> tuple[str, str]:
    """Accept an index directory or a direct .npz path."""
    if os.path.isdir(path):
        return os.path.join(path, INDEX_FILENAME), os.path.join(path, CORPUS_FILENAME)
    return path, os.path.join(os.path.dirname(path), CORPUS_FILENAME)


def ingest_job(config: RunConfig) -> dict:
    dataset = parse_squad_file(config.dataset)
    report = {
        "documents": len(dataset.documents),
        "items": len(dataset.items),
        "split_name": dataset.split_name,
    }
    if config.out:
        os.makedirs(os.path.dirname(config.out) or ".", exist_ok=True)
        save_manifest(dataset, config.out)
        report["manifest_path"] = config.out
    return _stamp(report, config)


def build_index_job(config: RunConfig) -> dict:
    dataset = parse_squad_file(config.dataset)
    corpus = build_corpus(dataset)
    pconfig = config.preprocess_config()
    processed = [preprocess(doc.text, pconfig) for doc in corpus]
    index = tfidf.fit(processed, preprocess_config=pconfig)
    os.makedirs(config.out or ".", exist_ok=True)
    index_path = os.path.join(config.out, INDEX_FILENAME)
    corpus_path = os.path.join(config.out, CORPUS_FILENAME)
    tfidf.save_index(index, index_path)
    save_manifest(dataset, corpus_path)
    return _stamp(
        {
            "index_path": index_path,
            "corpus_path": corpus_path,
            "n_docs": index.n_docs,
            "vocab_size": index.vocab_size,
            "n_questions": len(dataset.items),
        },
        config,
    )


def _load_dataset(path: str) -> Dataset:
    return load_manifest(path) if _is_manifest(path) else parse_squad_file(path)


def embed_job(config: RunConfig, client: httpx.Client | None = None) -> dict:
    if config.index:
        dataset = load_manifest(_index_paths(config.index)[1])
    elif config.dataset:
        dataset = _load_dataset(config.dataset)
    else:
        raise ConfigurationError("embed needs an index directory or a dataset")
    corpus = build_corpus(dataset)
    config.provider = config.provider or DEFAULT_PROVIDER_SPEC
    provider = parse_provider_spec(config.provider, client=client)
    matrix = embed_corpus(provider, corpus)
    os.makedirs(os.path.dirname(config.out) or ".", exist_ok=True)
    save_embeddings(matrix, config.out)
    return _stamp(
        {
            "path": config.out,
            "dim": matrix.dim,
            "count": len(matrix.doc_ids),
            "model": matrix.provider_tag,
        },
        config,
    )


def _load_artifacts(
    config: RunConfig, client: httpx.Client | None = None
) -> tuple[Dataset, tfidf.TfIdfIndex, EmbeddingMatrix, object]:
    """Load or build (dataset, index, corpus embeddings, query provider)."""
    if config.index:
        index_path, corpus_path = _index_paths(config.index)
        index = tfidf.load_index(index_path)
        dataset = _load_dataset(config.dataset) if config.dataset else load_manifest(corpus_path)
    elif config.dataset:
        dataset = _load_dataset(config.dataset)
        pconfig = config.preprocess_config()
        corpus = build_corpus(dataset)
        index = tfidf.fit([preprocess(d.text, pconfig) for d in corpus], preprocess_config=pconfig)
    else:
        raise ConfigurationError("either an index or a dataset is required")
    corpus = build_corpus(dataset)
    if index.n_docs != len(corpus):
        raise ConfigurationError(
            f"index holds {index.n_docs} documents, dataset has {len(corpus)}"
        )
    if config.embeddings:
        emb = load_embeddings(config.embeddings, corpus)
        config.provider = config.provider or f"stub:dim={emb.dim}"
        provider = parse_provider_spec(config.provider, client=client)
    else:
        config.provider = config.provider or DEFAULT_PROVIDER_SPEC
        provider = parse_provider_spec(config.provider, client=client)
        emb = embed_corpus(provider, corpus)
    return dataset, index, emb, provider


def retrieve_job(config: RunConfig, query: str, client: httpx.Client | None = None) -> dict:
    _, index, emb, provider = _load_artifacts(config, client=client)
    rconfig = config.retriever_config()
    result = retriever.retrieve(query, index, emb, provider, rconfig)
    qv = tfidf.transform_query(index, preprocess(query, index.preprocess_config))
    report = retriever.result_to_dict(query, result)
    report["tfidf_query_is_zero"] = qv.is_zero
    return _stamp(report, config)


def _retrieve_all(
    dataset: Dataset,
    index: tfidf.TfIdfIndex,
    emb: EmbeddingMatrix,
    provider,
    config: RunConfig,
) -> list[retriever.RetrievalResult]:
    rconfig = config.retriever_config()

    def one(item):
        return retriever.retrieve(
            item.question, index, emb, provider, rconfig, query_id=item.question_id
        )

    if config.jobs > 1 and len(dataset.items) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(one, dataset.items))
    return [one(item) for item in dataset.items]


def eval_retriever_job(config: RunConfig, client: httpx.Client | None = None) -> dict:
    dataset, index, emb, provider = _load_artifacts(config, client=client)
    results = _retrieve_all(dataset, index, emb, provider, config)
    report = metrics.evaluate_retriever(dataset, results)
    return _stamp(report.as_dict(), config)


def make_readers(specs: list[str], dataset: Dataset | None, client: httpx.Client | None = None):
    readers = []
    for i, spec in enumerate(specs):
        if spec == "stub":
            readers.append(FirstTokensReader(model_id=f"stub-first-tokens-{i + 1}"))
        elif spec == "oracle":
            if dataset is None:
                raise ConfigurationError("oracle reader needs a dataset with gold answers")
            answers = {item.question: item.gold_answers[0] for item in dataset.items}
            readers.append(PlantedSpanReader(answers, model_id=f"stub-planted-{i + 1}"))
        elif spec.startswith(("http://", "https://")):
            readers.append(HttpReader(spec, client=client))
        else:
            raise ConfigurationError(f"unknown reader spec {spec!r}")
    return readers


def run_readers(
    dataset: Dataset,
    results: list[retriever.RetrievalResult],
    readers: list,
    config: RunConfig,
) -> list[reader.EnsemblePrediction]:
    """Feed each question's top retrieved contexts to every reader."""
    docs_by_id = {d.id: d for d in dataset.documents}

    def one(pair):
        item, result = pair
        per_model: dict[str, list[reader.ReaderAnswer]] = {}
        failures: list[str] = []
        for triple in result.top[: config.reader_context_top_n]:
            context = docs_by_id[triple.doc_id].text
            answers, failed = reader.gather_answers(
                readers, item.question, context, k=config.reader_top_k
            )
            for model_id, model_answers in answers.items():
                per_model.setdefault(model_id, []).extend(model_answers)
            failures.extend(failed)
        for model_answers in per_model.values():
            model_answers.sort(key=lambda a: -a.score)
        return reader.ensemble_union(
            per_model, question_id=item.question_id, failed_models=sorted(set(failures))
        )

    pairs = list(zip(dataset.items, results))
    if config.jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(one, pairs))
    return [one(pair) for pair in pairs]


def eval_reader_job(config: RunConfig, predictions_path: str) -> dict:
    dataset = _load_dataset(config.dataset)
    predictions = reader.load_predictions(predictions_path)
    report, _ = metrics.evaluate_reader(dataset, predictions, config.similar_threshold)
    return _stamp(report.as_dict(), config)


def _is_manifest(path: str) -> bool:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            head = fh.read(4096)
        return '"format_version"' in head
    except OSError:
        return False


def e2e_job(config: RunConfig, client: httpx.Client | None = None) -> dict:
    """Full pipeline: ingest, index, embed, retrieve, read, evaluate."""
    dataset, index, emb, provider = _load_artifacts(config, client=client)
    results = _retrieve_all(dataset, index, emb, provider, config)
    retriever_report = metrics.evaluate_retriever(dataset, results)

    report: dict = {
        "n": retriever_report.n_questions,
        "top1": retriever_report.top_k[1],
        "top5": retriever_report.top_k[5],
        "em": None,
        "f1": None,
        "em_primary": None,
        "counts": None,
        "threshold": config.similar_threshold,
    }
    rows = [
        metrics.PerQuestionRow(
            question_id=item.question_id, hit_rank=rank, em=0, f1=0.0, category=None
        )
        for item, rank in zip(dataset.items, retriever_report.hit_ranks)
    ]

    predictions: list[reader.EnsemblePrediction] = []
    if config.readers:
        readers = make_readers(config.readers, dataset, client=client)
        predictions = run_readers(dataset, results, readers, config)
        reader_report, reader_rows = metrics.evaluate_reader(
            dataset, predictions, config.similar_threshold
        )
        report.update(reader_report.as_dict())
        report["n"] = retriever_report.n_questions
        for row, reader_row in zip(rows, reader_rows):
            row.em = reader_row.em
            row.f1 = reader_row.f1
            row.category = reader_row.category

    if config.out:
        os.makedirs(config.out, exist_ok=True)
        if predictions:
            reader.save_predictions(predictions, os.path.join(config.out, "predictions.jsonl"))
        _write_rows_csv(rows, os.path.join(config.out, "per_question.csv"))
        stamped = _stamp(report, config)
        with open(os.path.join(config.out, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(stamped, fh, indent=2, sort_keys=True)
        return stamped
    return _stamp(report, config)


def _write_rows_csv(rows: list[metrics.PerQuestionRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["question_id", "hit_rank", "em", "f1", "category"])
        for row in rows:
            writer.writerow(
                [
                    row.question_id,
                    "" if row.hit_rank is None else row.hit_rank,
                    row.em,
                    f"{row.f1:.6f}",
                    row.category.value if row.category else "",
                ]
            )


RETRIEVER_ABLATIONS: tuple[tuple[str, dict], ...] = (
    ("tfidf", {"stopwords": "off", "stemmer": "none", "w_tfidf": 1.0, "w_transformer": 0.0}),
    ("tfidf+preprocessing", {"stopwords": "on", "stemmer": "porter", "w_tfidf": 1.0, "w_transformer": 0.0}),
    (
        "tfidf+preprocessing+st",
        {"stopwords": "on", "stemmer": "porter", "w_tfidf": 0.6, "w_transformer": 0.4},
    ),
)


def ablation_retriever_job(config: RunConfig, client: httpx.Client | None = None) -> dict:
    """One retrieval evaluation row per pipeline configuration."""
    rows = []
    for label, overrides in RETRIEVER_ABLATIONS:
        row_config = RunConfig(**{**config.__dict__, **overrides, "index": ""})
        dataset, index, emb, provider = _load_artifacts(row_config, client=client)
        results = _retrieve_all(dataset, index, emb, provider, row_config)
        report = metrics.evaluate_retriever(dataset, results)
        rows.append(
            {
                "label": label,
                "config": row_config.echo(),
                "top1": report.top_k[1],
                "top5": report.top_k[5],
            }
        )
    return _stamp({"rows": rows}, config)


def ablation_reader_job(config: RunConfig, client: httpx.Client | None = None) -> dict:
    """One reader evaluation row per reader subset: each model alone, then all."""
    if not config.readers:
        raise ConfigurationError("reader ablation requires at least one reader")
    dataset, index, emb, provider = _load_artifacts(config, client=client)
    results = _retrieve_all(dataset, index, emb, provider, config)
    subsets = [[spec] for spec in config.readers]
    if len(config.readers) > 1:
        subsets.append(list(config.readers))
    rows = []
    for subset in subsets:
        row_config = RunConfig(**{**config.__dict__, "readers": subset})
        readers = make_readers(subset, dataset, client=client)
        predictions = run_readers(dataset, results, readers, row_config)
        report, _ = metrics.evaluate_reader(dataset, predictions, config.similar_threshold)
        label = "+".join(subset) if len(subset) > 1 else subset[0]
        if subset == list(config.readers) and len(subset) > 1:
            label = "ensemble"
        rows.append({"label": label, "config": row_config.echo(), **report.as_dict()})
    return _stamp({"rows": rows}, config)
