import json

import pytest

from hwqa.corpus import (
    Dataset,
    Document,
    QAItem,
    build_corpus,
    dataset_from_manifest,
    dataset_to_manifest,
    parse_squad,
)
from hwqa.errors import EmptyCorpusError, ParseError, SchemaError

from conftest import make_squad_bytes


class TestParseSquad:
    def test_duplicate_contexts_collapse(self):
        data = make_squad_bytes(
            [
                ("Same context text.", [("q1", "first?", ["context"])]),
                ("Same context text.", [("q2", "second?", ["text"])]),
            ]
        )
        dataset = parse_squad(data)
        assert len(dataset.documents) == 1
        assert [d.id for d in dataset.documents] == [0]
        assert [item.gold_doc_id for item in dataset.items] == [0, 0]

    def test_first_seen_ordering(self):
        data = make_squad_bytes(
            [
                ("A", []),
                ("B", [("q1", "which?", ["B"])]),
            ]
        )
        dataset = parse_squad(data)
        assert [d.text for d in dataset.documents] == ["A", "B"]
        assert dataset.items[0].gold_doc_id == 1

    def test_gold_answer_collected(self):
        data = make_squad_bytes(
            [
                (
                    "Teachers facilitate student learning every day.",
                    [("q1", "What do teachers do?", ["facilitate student learning"])],
                )
            ]
        )
        dataset = parse_squad(data)
        assert dataset.items[0].gold_answers == ("facilitate student learning",)

    def test_duplicate_answers_deduplicated(self):
        data = make_squad_bytes(
            [("The answer is here.", [("q1", "where?", ["here", "here", "answer"])])]
        )
        assert parse_squad(data).items[0].gold_answers == ("here", "answer")

    def test_nfc_normalization_merges_contexts(self):
        composed = "café context"
        decomposed = "café context"
        data = make_squad_bytes([(composed, []), (decomposed, [])])
        assert len(parse_squad(data).documents) == 1

    def test_malformed_json_reports_offset(self):
        with pytest.raises(ParseError) as err:
            parse_squad(b'{"data": [')
        assert err.value.offset is not None

    def test_missing_field_names_path(self):
        raw = json.dumps({"data": [{"paragraphs": [{"context": "x", "qas": [{"id": "q"}]}]}]})
        with pytest.raises(SchemaError) as err:
            parse_squad(raw.encode())
        assert "question" in str(err.value)

    def test_empty_answers_rejected(self):
        raw = json.dumps(
            {
                "data": [
                    {
                        "paragraphs": [
                            {
                                "context": "x y z",
                                "qas": [{"id": "q", "question": "what?", "answers": []}],
                            }
                        ]
                    }
                ]
            }
        )
        with pytest.raises(SchemaError):
            parse_squad(raw.encode())

    def test_answer_not_substring_warns_not_fails(self, caplog):
        data = make_squad_bytes(
            [("Recognized text with ocr noise.", [("q1", "what?", ["unrecognized span"])])]
        )
        with caplog.at_level("WARNING"):
            dataset = parse_squad(data)
        assert len(dataset.items) == 1
        assert any("not a substring" in r.message for r in caplog.records)

    def test_deterministic(self):
        data = make_squad_bytes([("A b c.", [("q1", "what?", ["b"])]), ("D e f.", [])])
        assert parse_squad(data) == parse_squad(data)

    def test_item_counts_partition_documents(self):
        data = make_squad_bytes(
            [
                ("Doc one.", [("q1", "a?", ["one"]), ("q2", "b?", ["Doc"])]),
                ("Doc two.", [("q3", "c?", ["two"])]),
            ]
        )
        dataset = parse_squad(data)
        per_doc = [sum(1 for it in dataset.items if it.gold_doc_id == d.id) for d in dataset.documents]
        assert sum(per_doc) == len(dataset.items)


class TestBuildCorpus:
    def test_id_order(self):
        data = make_squad_bytes([("One.", []), ("Two.", []), ("Three.", [])])
        corpus = build_corpus(parse_squad(data))
        assert [d.id for d in corpus] == [0, 1, 2]

    def test_no_duplicate_texts(self):
        data = make_squad_bytes([("Same.", []), ("Same.", []), ("Other.", [])])
        corpus = build_corpus(parse_squad(data))
        assert len({d.text for d in corpus}) == len(corpus)

    def test_empty_dataset_raises(self):
        with pytest.raises(EmptyCorpusError):
            build_corpus(Dataset(documents=[], items=[]))

    def test_round_trip_deterministic(self):
        data = make_squad_bytes([("Alpha beta.", [("q1", "x?", ["beta"])])])
        first = dataset_to_manifest(parse_squad(data))
        second = dataset_to_manifest(parse_squad(data))
        assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


class TestDatasetInvariants:
    def test_gold_doc_id_bounds_checked(self):
        with pytest.raises(SchemaError):
            Dataset(
                documents=[Document(0, "x")],
                items=[QAItem("q", "why?", ("x",), gold_doc_id=3)],
            )

    def test_manifest_round_trip(self):
        data = make_squad_bytes(
            [("Alpha beta gamma.", [("q1", "which?", ["beta"])]), ("Delta.", [])]
        )
        dataset = parse_squad(data)
        assert dataset_from_manifest(dataset_to_manifest(dataset)) == dataset
