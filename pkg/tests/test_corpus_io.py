import logging

import pytest
from hypothesis import given, strategies as st

from gwpt.corpus_io import (
    TaggedSentence,
    TagSet,
    build_tagset,
    parse_conllu,
    parse_text,
    parse_tsv,
    read_corpus,
    write_tsv,
)
from gwpt.errors import ParseError, UnknownTagError


def row(i, form, upos):
    return "\t".join([str(i), form, "_", upos, "_", "_", "_", "_", "_", "_"])


def test_conllu_two_tokens():
    text = row(1, "w1", "NOUN") + "\n" + row(2, "w2", "VERB") + "\n\n"
    assert parse_conllu(text) == [TaggedSentence(("w1", "w2"), ("NOUN", "VERB"))]


def test_conllu_comments_ignored_and_sent_id_kept():
    plain = row(1, "a", "DET") + "\n\n"
    commented = "# sent_id = x-1\n# text = a\n" + plain
    out = parse_conllu(commented)
    assert out[0].tokens == ("a",) and out[0].tags == ("DET",)
    assert out[0].sid == "x-1"
    assert parse_conllu(plain)[0].tokens == out[0].tokens


def test_conllu_range_and_empty_nodes_skipped():
    text = "\n".join([
        "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_",
        row(1, "do", "AUX"),
        row(2, "n't", "PART"),
        "2.1\tghost\t_\tX\t_\t_\t_\t_\t_\t_",
        "",
    ])
    out = parse_conllu(text)
    assert out[0].tokens == ("do", "n't")
    assert out[0].tags == ("AUX", "PART")


def test_conllu_bad_column_count_reports_line():
    text = row(1, "a", "DET") + "\n" + "2\tb\tNOUN\n"
    with pytest.raises(ParseError) as info:
        parse_conllu(text, source="f.conllu")
    assert info.value.line == 2
    assert "f.conllu:2:" in str(info.value)


def test_conllu_tokenless_block_skipped_with_warning(caplog):
    text = "# sent_id = 1\n\n" + row(1, "a", "DET") + "\n"
    with caplog.at_level(logging.WARNING):
        out = parse_conllu(text)
    assert len(out) == 1
    assert "no tokens" in caplog.text


def test_tsv_basic():
    out = parse_tsv("The\tDT\ncat\tNN\n\n")
    assert out == [TaggedSentence(("The", "cat"), ("DT", "NN"))]


def test_tsv_empty_input():
    assert parse_tsv("") == []


def test_tsv_multiple_blank_lines():
    out = parse_tsv("a\tX\n\n\nb\tY\n")
    assert [s.tokens for s in out] == [("a",), ("b",)]


def test_tsv_field_count_error():
    with pytest.raises(ParseError) as info:
        parse_tsv("a\tX\nb\tY\textra\n")
    assert info.value.line == 2


def test_text_format_untagged():
    out = parse_text("the cat  sat\n\n  dog\n")
    assert [s.tokens for s in out] == [("the", "cat", "sat"), ("dog",)]
    assert all(s.tags is None for s in out)


def test_tagset_sorted_dedup():
    sents = [TaggedSentence(("a", "b"), ("NOUN", "VERB")), TaggedSentence(("c",), ("NOUN",))]
    ts = build_tagset(sents)
    assert ts.symbols == ("NOUN", "VERB")
    assert ts.encode(["NOUN", "VERB"]) == [0, 1]
    assert ts.decode([1, 0]) == ["VERB", "NOUN"]


def test_tagset_unknown_tag():
    with pytest.raises(UnknownTagError):
        TagSet(("A",)).encode(["B"])


def test_sentence_validation():
    with pytest.raises(ValueError):
        TaggedSentence((), ())
    with pytest.raises(ValueError):
        TaggedSentence(("a", "b"), ("X",))


def test_read_corpus_detects_format(tmp_path):
    p = tmp_path / "c.conllu"
    p.write_text(row(1, "a", "DET") + "\n\n", encoding="utf-8")
    assert read_corpus(p)[0].tags == ("DET",)
    q = tmp_path / "c.tsv"
    q.write_text("a\tDET\n", encoding="utf-8")
    assert read_corpus(q)[0].tags == ("DET",)


token = st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs", "Zs", "Zl", "Zp")),
                min_size=1, max_size=6)
sentence = st.lists(st.tuples(token, st.sampled_from(["NOUN", "VERB", "DET"])), min_size=1, max_size=6)


@given(st.lists(sentence, max_size=5))
def test_tsv_roundtrip(sents):
    corpus = [TaggedSentence(tuple(t for t, _ in s), tuple(g for _, g in s)) for s in sents]
    assert parse_tsv(write_tsv(corpus)) == corpus
