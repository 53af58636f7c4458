import numpy as np
import pytest

from inference_server.backends import HashingEmbedder, LexicalReader, make_embedder, make_reader


class TestHashingEmbedder:
    def test_deterministic(self):
        embedder = HashingEmbedder(dim=32)
        a = embedder.embed(["the quick brown fox", "lazy dog"])
        b = embedder.embed(["the quick brown fox", "lazy dog"])
        assert a.tobytes() == b.tobytes()

    def test_row_order_follows_input(self):
        embedder = HashingEmbedder(dim=32)
        ab = embedder.embed(["alpha", "beta"])
        ba = embedder.embed(["beta", "alpha"])
        np.testing.assert_array_equal(ab[0], ba[1])

    def test_unit_norm_for_nonempty(self):
        embedder = HashingEmbedder(dim=64)
        rows = embedder.embed(["one two three", "four"])
        for row in rows:
            assert np.linalg.norm(row) == pytest.approx(1.0, abs=1e-12)

    def test_empty_text_is_zero_vector(self):
        embedder = HashingEmbedder(dim=16)
        np.testing.assert_array_equal(embedder.embed([""])[0], np.zeros(16))

    def test_token_overlap_beats_disjoint(self):
        embedder = HashingEmbedder(dim=128)
        base, overlap, disjoint = embedder.embed(
            [
                "canal locks and steam tugs",
                "steam tugs on the canal",
                "observatory catalogue of stars",
            ]
        )
        assert float(base @ overlap) > float(base @ disjoint)


class TestLexicalReader:
    CONTEXT = "The lighthouse at Cape Arden was completed in 1874 and rebuilt after the storm."

    def test_deterministic(self):
        reader = LexicalReader()
        first = reader.answer("When was the lighthouse completed?", self.CONTEXT, 3)
        second = reader.answer("When was the lighthouse completed?", self.CONTEXT, 3)
        assert first == second

    def test_scores_descending_in_range(self):
        reader = LexicalReader()
        answers = reader.answer("When was the lighthouse at Cape Arden completed?", self.CONTEXT, 5)
        scores = [a["score"] for a in answers]
        assert scores == sorted(scores, reverse=True)
        assert all(0.0 <= s <= 1.0 for s in scores)

    def test_offsets_anchor_text(self):
        reader = LexicalReader()
        for answer in reader.answer("What happened after the storm?", self.CONTEXT, 4):
            assert self.CONTEXT[answer["start"] : answer["end"]] == answer["text"]

    def test_top_k_respected(self):
        reader = LexicalReader()
        assert len(reader.answer("lighthouse?", self.CONTEXT, 1)) <= 1
        assert len(reader.answer("lighthouse?", self.CONTEXT, 2)) <= 2

    def test_neighborhood_extraction_finds_planted_answer(self):
        context = "The canal between Dorrit and Faulkner used seventeen locks all year."
        reader = LexicalReader()
        answers = reader.answer("How many locks did the canal between Dorrit and Faulkner use?", context, 3)
        assert any("seventeen" in a["text"] for a in answers)

    def test_nonempty_context_always_answers(self):
        reader = LexicalReader()
        answers = reader.answer("completely unrelated query terms", "short context here", 1)
        assert len(answers) == 1

    def test_empty_context_returns_nothing(self):
        assert LexicalReader().answer("anything?", "... !!! ...", 2) == []


class TestSpecs:
    def test_hash_spec(self):
        embedder = make_embedder("hash:dim=48")
        assert embedder.dim == 48

    def test_lexical_spec_with_tag(self):
        reader = make_reader("lexical:tag=bert-sim-1")
        assert reader.tag == "bert-sim-1"

    def test_unknown_specs_rejected(self):
        with pytest.raises(ValueError):
            make_embedder("glove:dim=50")
        with pytest.raises(ValueError):
            make_reader("rnn")
