import json

import pytest
from fastapi.testclient import TestClient

from hwqa.service import create_app


def make_squad_bytes(paragraphs, title="doc"):
    """Build SQuAD v1.1 JSON bytes.

    ``paragraphs`` is a list of (context, qas) where qas is a list of
    (qid, question, [answer texts]).
    """
    data = {
        "version": "1.1",
        "data": [
            {
                "title": title,
                "paragraphs": [
                    {
                        "context": context,
                        "qas": [
                            {
                                "id": qid,
                                "question": question,
                                "answers": [
                                    {"text": text, "answer_start": context.find(text)}
                                    for text in answers
                                ],
                            }
                            for qid, question, answers in qas
                        ],
                    }
                    for context, qas in paragraphs
                ],
            }
        ],
    }
    return json.dumps(data).encode("utf-8")


def make_planted_squad(n_docs=20, n_questions=50):
    """Synthetic dataset with disjoint per-document vocabularies.

    Each document owns tokens no other document contains; each question uses
    six of its gold document's tokens and its answer is a planted two-token
    span of that document.
    """
    paragraphs = []
    qid = 0
    questions_per_doc = [n_questions // n_docs] * n_docs
    for i in range(n_questions % n_docs):
        questions_per_doc[i] += 1
    for d in range(n_docs):
        words = [f"d{d}w{j}" for j in range(10)]
        answer = f"d{d}answera d{d}answerb"
        context = " ".join(words) + " " + answer + "."
        qas = []
        for q in range(questions_per_doc[d]):
            picked = [words[(q + j) % len(words)] for j in range(6)]
            qas.append((f"q{qid}", " ".join(picked) + "?", [answer]))
            qid += 1
        paragraphs.append((context, qas))
    return make_squad_bytes(paragraphs, title="planted")


@pytest.fixture
def planted_squad_path(tmp_path):
    path = tmp_path / "planted.json"
    path.write_bytes(make_planted_squad())
    return str(path)


@pytest.fixture
def service_client():
    with TestClient(create_app()) as client:
        yield client
