import json
import logging

import numpy as np
import pytest

from gwpt.corpus_io import TaggedSentence
from gwpt.embeddings import (
    corpus_vocabulary,
    embed_corpus,
    load_subword_map,
    load_token_embeddings,
    load_word_vectors,
)
from gwpt.errors import EmbeddingError, OOVError, ParseError


def test_word_vectors_basic():
    t = load_word_vectors("2 3\na 1 2 3\nb 4 5 6\n")
    assert t.dim == 3 and len(t) == 2
    np.testing.assert_array_equal(t.get("b"), [4, 5, 6])


def test_word_vectors_short_row_error_line():
    with pytest.raises(ParseError) as info:
        load_word_vectors("2 3\na 1 2 3\nb 4 5\n")
    assert info.value.line == 3


def test_word_vectors_non_numeric():
    with pytest.raises(ParseError):
        load_word_vectors("1 2\na 1 x\n")


def test_word_vectors_vocab_filter_still_validates():
    t = load_word_vectors("2 2\na 1 2\nb 3 4\n", vocab_filter={"b"})
    assert list(t.vocab) == ["b"]
    with pytest.raises(ParseError):
        load_word_vectors("2 2\na 1\nb 3 4\n", vocab_filter={"b"})


def test_word_vectors_header_mismatch_warns(caplog):
    with caplog.at_level(logging.WARNING):
        t = load_word_vectors("5 2\na 1 2\n")
    assert len(t) == 1
    assert caplog.text


def test_token_embeddings_basic():
    t = load_token_embeddings(json.dumps({"sid": "s1", "vecs": [[1, 2, 3, 4], [5, 6, 7, 8]]}) + "\n")
    assert t.dim == 4
    assert t.records["s1"].shape == (2, 4)


def test_token_embeddings_empty():
    with pytest.raises(EmbeddingError, match="no records"):
        load_token_embeddings("")


def test_token_embeddings_ragged_names_sid():
    with pytest.raises(EmbeddingError, match="s9"):
        load_token_embeddings(json.dumps({"sid": "s9", "vecs": [[1, 2], [3]]}))


def test_embed_identity_and_layout():
    t = load_word_vectors("2 3\na 1 2 3\nb 4 5 6\n")
    (e,) = embed_corpus([TaggedSentence(("b", "a"), ("X", "Y"))], t)
    assert e.matrix.shape == (3, 2)
    np.testing.assert_array_equal(e.matrix[:, 0], [4, 5, 6])
    np.testing.assert_array_equal(e.matrix[:, 1], [1, 2, 3])
    assert e.tags == ("X", "Y")


def test_embed_subword_mean():
    t = load_word_vectors("2 2\nun 1 3\nhappy 5 7\n")
    subs = load_subword_map("unhappy\tun happy\n")
    (e,) = embed_corpus([TaggedSentence(("unhappy",))], t, subwords=subs)
    np.testing.assert_array_equal(e.matrix[:, 0], [3, 5])


def test_embed_oov_policies():
    t = load_word_vectors("1 2\nthe 1 2\n")
    sent = [TaggedSentence(("The", "zzz"))]
    (zero,) = embed_corpus(sent, t, "zero")
    np.testing.assert_array_equal(zero.matrix, np.zeros((2, 2)))
    assert zero.oov == (True, True)
    (low,) = embed_corpus(sent, t, "lower-zero")
    np.testing.assert_array_equal(low.matrix[:, 0], [1, 2])
    assert low.oov == (False, True)
    with pytest.raises(OOVError) as info:
        embed_corpus(sent, t, "error")
    assert info.value.token == "The"


def test_embed_contextual_by_sid_and_index():
    src = load_token_embeddings(
        json.dumps({"sid": "a", "vecs": [[1.0, 2.0]]}) + "\n"
        + json.dumps({"sid": "1", "vecs": [[3.0, 4.0], [5.0, 6.0]]}) + "\n"
    )
    out = embed_corpus([TaggedSentence(("x",), sid="a"), TaggedSentence(("y", "z"))], src)
    np.testing.assert_array_equal(out[1].matrix, [[3, 5], [4, 6]])
    with pytest.raises(EmbeddingError):
        embed_corpus([TaggedSentence(("x", "y"), sid="a")], src)


def test_corpus_vocabulary_includes_lowercase_and_subwords():
    v = corpus_vocabulary([TaggedSentence(("The", "unhappy"))], {"unhappy": ("un", "happy")})
    assert {"The", "the", "un", "happy"} <= v
