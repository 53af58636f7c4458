import json

import pytest
from fastapi.testclient import TestClient

from inference_server.app import create_app
from inference_server.backends import HashingEmbedder, LexicalReader

# Wire schemas the pipeline client expects; kept literal here so the tests
# validate the contract, not this package's implementation details.
EMBED_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["model", "dim", "vectors"],
    "properties": {
        "model": {"type": "string"},
        "dim": {"type": "integer", "minimum": 1},
        "vectors": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
    },
}

ANSWER_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["model", "answers"],
    "properties": {
        "model": {"type": "string"},
        "answers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["text", "start", "end", "score"],
                "properties": {
                    "text": {"type": "string"},
                    "start": {"type": "integer", "minimum": 0},
                    "end": {"type": "integer", "minimum": 0},
                    "score": {"type": "number", "minimum": 0.0, "maximum": 1.0},
                },
            },
        },
    },
}

HEALTH_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["status", "models"],
    "properties": {
        "status": {"type": "string"},
        "models": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    },
}

# 7 contexts, 20 questions; every answer is a verbatim span of its context.
SLICE = [
    (
        "The lighthouse at Cape Arden was completed in 1874 and its lamp "
        "burned whale oil until electrification in 1921.",
        [
            ("When was the lighthouse at Cape Arden completed?", "1874"),
            ("What did the lamp burn before electrification?", "whale oil"),
            ("When did electrification of the lamp happen?", "1921"),
        ],
    ),
    (
        "Maren Holt founded the observatory on Brekke Hill, and her first "
        "catalogue listed 417 variable stars.",
        [
            ("Who founded the observatory on Brekke Hill?", "Maren Holt"),
            ("How many variable stars did the first catalogue list?", "417"),
            ("Where was the observatory founded?", "Brekke Hill"),
        ],
    ),
    (
        "The canal between Dorrit and Faulkner used seventeen locks; mules "
        "towed the barges until steam tugs replaced them.",
        [
            ("How many locks did the canal use?", "seventeen"),
            ("What towed the barges at first?", "mules"),
            ("What replaced the mules towing barges?", "steam tugs"),
        ],
    ),
    (
        "Quarry Lane school taught bookbinding, and its pupils sold ledgers "
        "at the spring fair to fund the library.",
        [
            ("What craft did Quarry Lane school teach?", "bookbinding"),
            ("What did pupils sell at the spring fair?", "ledgers"),
            ("What did the sales of ledgers fund?", "the library"),
        ],
    ),
    (
        "The glasshouse grows tomatoes in winter by channelling warm water "
        "from the foundry next door through clay pipes.",
        [
            ("What does the glasshouse grow in winter?", "tomatoes"),
            ("Where does the warm water come from?", "the foundry"),
            ("What are the pipes made of?", "clay"),
        ],
    ),
    (
        "Bell ringers at Saint Maur practice on Thursdays; the heaviest "
        "bell, called Gros Pierre, weighs three tonnes.",
        [
            ("On which day do the bell ringers practice?", "Thursdays"),
            ("What is the heaviest bell called?", "Gros Pierre"),
            ("How much does the heaviest bell weigh?", "three tonnes"),
        ],
    ),
    (
        "The ferry crossing at Lowen Sound takes forty minutes, and in fog "
        "the pilot follows a chain laid on the seabed.",
        [
            ("How long does the ferry crossing take?", "forty minutes"),
            ("What does the pilot follow in fog?", "a chain"),
        ],
    ),
]


def slice_squad_json() -> bytes:
    qid = 0
    articles = []
    for context, qas in SLICE:
        entries = []
        for question, answer in qas:
            start = context.find(answer)
            assert start >= 0, (context, answer)
            entries.append(
                {"id": f"s{qid}", "question": question,
                 "answers": [{"text": answer, "answer_start": start}]}
            )
            qid += 1
        articles.append({"context": context, "qas": entries})
    return json.dumps({"version": "1.1", "data": [{"title": "slice", "paragraphs": articles}]}).encode()


@pytest.fixture
def slice_path(tmp_path):
    path = tmp_path / "slice.json"
    path.write_bytes(slice_squad_json())
    return str(path)


@pytest.fixture
def offline_client():
    app = create_app(
        embedder=HashingEmbedder(dim=64),
        reader=LexicalReader(model_id="lexical-test"),
        max_batch=16,
    )
    with TestClient(app) as client:
        yield client
