"""SQuAD-format ingestion into a deduplicated corpus.

Contexts are deduplicated by exact string equality after Unicode NFC
normalization and assigned dense integer ids in first-seen order. Every
question keeps all of its distinct gold answer texts and the id of the
context paragraph it was attached to in the source JSON.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from unicodedata import normalize

from .errors import EmptyCorpusError, ParseError, SchemaError

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class Document:
    id: int
    text: str


@dataclass(frozen=True)
class QAItem:
    question_id: str
    question: str
    gold_answers: tuple[str, ...]
    gold_doc_id: int


@dataclass
class Dataset:
    documents: list[Document]
    items: list[QAItem]
    split_name: str = ""

    def __post_init__(self):
        n = len(self.documents)
        for item in self.items:
            if not 0 <= item.gold_doc_id < n:
                raise SchemaError(
                    f"question {item.question_id!r} references document "
                    f"{item.gold_doc_id} outside corpus of size {n}"
                )


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing required field at {path}.{key}", path=f"{path}.{key}")
    return obj[key]


def parse_squad(data: bytes, split_name: str = "") -> Dataset:
    """Parse SQuAD v1.1-shaped JSON bytes into a :class:`Dataset`.

    One :class:`Document` per distinct NFC-normalized context string, ids in
    first-seen order. Questions without at least one non-empty answer are
    rejected: the task is extractive.
    """
    try:
        root = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}", offset=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at byte {exc.pos}: {exc.msg}", offset=exc.pos) from exc

    articles = _require(root, "data", "$")
    if not isinstance(articles, list):
        raise SchemaError("field $.data must be a list", path="$.data")

    documents: list[Document] = []
    doc_id_by_text: dict[str, int] = {}
    items: list[QAItem] = []

    for ai, article in enumerate(articles):
        apath = f"$.data[{ai}]"
        paragraphs = _require(article, "paragraphs", apath)
        for pi, para in enumerate(paragraphs):
            ppath = f"{apath}.paragraphs[{pi}]"
            context = normalize("NFC", str(_require(para, "context", ppath)))
            if not context.strip():
                raise SchemaError(f"empty context at {ppath}.context", path=f"{ppath}.context")
            if context in doc_id_by_text:
                doc_id = doc_id_by_text[context]
            else:
                doc_id = len(documents)
                doc_id_by_text[context] = doc_id
                documents.append(Document(id=doc_id, text=context))

            for qi, qa in enumerate(para.get("qas", [])):
                qpath = f"{ppath}.qas[{qi}]"
                question = normalize("NFC", str(_require(qa, "question", qpath)))
                qid = str(_require(qa, "id", qpath))
                answers = _require(qa, "answers", qpath)
                texts: list[str] = []
                for answer in answers:
                    text = normalize("NFC", str(answer.get("text", "")))
                    if text and text not in texts:
                        texts.append(text)
                if qa.get("is_impossible") or not texts:
                    raise SchemaError(
                        f"question at {qpath} has no extractable answer",
                        path=f"{qpath}.answers",
                    )
                for text in texts:
                    if text not in context:
                        logger.warning(
                            "answer %r for question %s is not a substring of its context",
                            text[:60],
                            qid,
                        )
                items.append(
                    QAItem(
                        question_id=qid,
                        question=question,
                        gold_answers=tuple(texts),
                        gold_doc_id=doc_id,
                    )
                )

    return Dataset(documents=documents, items=items, split_name=split_name)


def parse_squad_file(path: str, split_name: str | None = None) -> Dataset:
    with open(path, "rb") as fh:
        data = fh.read()
    if split_name is None:
        split_name = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_squad(data, split_name=split_name)


def build_corpus(dataset: Dataset) -> list[Document]:
    """Documents in id order; stable across runs for identical input."""
    if not dataset.documents:
        raise EmptyCorpusError("dataset contains no documents")
    return sorted(dataset.documents, key=lambda d: d.id)


def dataset_to_manifest(dataset: Dataset) -> dict:
    return {
        "format_version": MANIFEST_VERSION,
        "split_name": dataset.split_name,
        "documents": [{"id": d.id, "text": d.text} for d in dataset.documents],
        "items": [
            {
                "question_id": it.question_id,
                "question": it.question,
                "gold_answers": list(it.gold_answers),
                "gold_doc_id": it.gold_doc_id,
            }
            for it in dataset.items
        ],
    }


def dataset_from_manifest(manifest: dict) -> Dataset:
    documents = [Document(id=d["id"], text=d["text"]) for d in manifest["documents"]]
    items = [
        QAItem(
            question_id=it["question_id"],
            question=it["question"],
            gold_answers=tuple(it["gold_answers"]),
            gold_doc_id=it["gold_doc_id"],
        )
        for it in manifest["items"]
    ]
    return Dataset(documents=documents, items=items, split_name=manifest.get("split_name", ""))


def save_manifest(dataset: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataset_to_manifest(dataset), fh, ensure_ascii=False, sort_keys=True)


def load_manifest(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return dataset_from_manifest(json.load(fh))
