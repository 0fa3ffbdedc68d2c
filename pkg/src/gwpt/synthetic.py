"""Synthetic corpora with known frequency structure and a known tagging rule.

Contextual corpus: every token gets its own vector. Three kinds of dimension
are planted:

* low frequency: a per-sentence linear ramp (one sign change after centring);
* mid frequency: a sign Markov chain with flip probability between 0.3 and 0.7;
* high frequency: alternating signs.

Two mid dimensions are designated, ``cur_dim`` and ``next_dim`` (flip
probability 0.5, so they sit in the middle of the sorted curve). The tag of
token ``m`` is ``TAGS[2 * [x_m[cur_dim] > 0] + [x_{m+1}[next_dim] >= 0]]``,
where the next value of the last token is taken as 0 (the zero padding the
N-gram windows use). Unigram features cannot see the next token, so they
cap the achievable accuracy well below the 100% that bigrams allow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from gwpt.corpus_io import TaggedSentence
from gwpt.embeddings import TokenEmbeddingFile, WordVectorTable

TAGS = ("ADJ", "DET", "NOUN", "VERB")


@dataclass(frozen=True)
class SyntheticCorpus:
    sentences: list[TaggedSentence]
    source: TokenEmbeddingFile | WordVectorTable
    low_dims: np.ndarray
    mid_dims: np.ndarray
    high_dims: np.ndarray
    cur_dim: int
    next_dim: int


def _tag(cur: float, nxt: float) -> str:
    return TAGS[2 * int(cur > 0) + int(nxt >= 0)]


def _rule_tags(cur_vals: np.ndarray, next_vals: np.ndarray) -> tuple[str, ...]:
    nxt = np.append(next_vals[1:], 0.0)
    return tuple(_tag(c, n) for c, n in zip(cur_vals, nxt))


def make_contextual_corpus(n_sentences: int = 2000, dim: int = 64, n_low: int = 8,
                           n_high: int = 8, min_len: int = 5, max_len: int = 15,
                           seed: int = 0) -> SyntheticCorpus:
    rng = np.random.default_rng(seed)
    n_mid = dim - n_low - n_high
    if n_mid < 2:
        raise ValueError("need at least two mid dimensions")
    roles = rng.permutation(dim)
    low, mid, high = roles[:n_low], roles[n_low:n_low + n_mid], roles[n_low + n_mid:]
    flip = np.linspace(0.3, 0.7, n_mid)
    scale = rng.permutation(np.linspace(0.5, 2.0, n_mid))
    # designated dims: flip probability 0.5 and scales above all others, so
    # their PCA eigenvalues stay apart from the rest of the mid band
    cur_slot, next_slot = (int(i) for i in rng.choice(n_mid, size=2, replace=False))
    flip[cur_slot] = flip[next_slot] = 0.5
    scale[cur_slot], scale[next_slot] = 3.0, 2.6
    cur_dim, next_dim = int(mid[cur_slot]), int(mid[next_slot])

    sentences = []
    records = {}
    for s in range(n_sentences):
        m = int(rng.integers(min_len, max_len + 1))
        mat = np.empty((dim, m))
        pos = np.arange(m) / (m - 1)
        for d in low:
            mat[d] = rng.normal() + rng.choice([-1.0, 1.0]) * rng.uniform(1.0, 2.0) * pos
        for j, d in enumerate(mid):
            flips = rng.random(m - 1) < flip[j]
            signs = np.cumprod(np.concatenate([[rng.choice([-1.0, 1.0])], np.where(flips, -1.0, 1.0)]))
            mat[d] = signs * rng.uniform(0.5, 1.5, m) * scale[j]
        for d in high:
            start = rng.choice([-1.0, 1.0])
            mat[d] = start * (-1.0) ** np.arange(m) * rng.uniform(0.5, 1.5, m)
        sid = f"s{s}"
        tags = _rule_tags(mat[cur_dim], mat[next_dim])
        sentences.append(TaggedSentence(tuple(f"w{s}_{i}" for i in range(m)), tags, sid))
        records[sid] = mat.T.copy()
    return SyntheticCorpus(sentences, TokenEmbeddingFile(dim, records), np.sort(low),
                           np.sort(mid), np.sort(high), cur_dim, next_dim)


def make_word_vector_corpus(n_sentences: int = 300, vocab_size: int = 120, dim: int = 300,
                            min_len: int = 4, max_len: int = 12, seed: int = 0) -> SyntheticCorpus:
    """Random word sequences over a random word-vector table, tagged by the same rule.

    Every dimension looks alike along a random word sequence, so no frequency
    structure is planted; this corpus exercises the word-vector path with the
    manual band cuts of the fastText preset.
    """
    rng = np.random.default_rng(seed)
    vectors = np.round(rng.normal(size=(vocab_size, dim)), 4)
    words = [f"tok{i}" for i in range(vocab_size)]
    cur_dim, next_dim = 100, 150
    sentences = []
    for s in range(n_sentences):
        m = int(rng.integers(min_len, max_len + 1))
        ids = rng.integers(0, vocab_size, m)
        tags = _rule_tags(vectors[ids, cur_dim], vectors[ids, next_dim])
        sentences.append(TaggedSentence(tuple(words[i] for i in ids), tags))
    table = WordVectorTable(dim, {w: i for i, w in enumerate(words)}, vectors)
    return SyntheticCorpus(sentences, table, np.array([], dtype=np.int64), np.arange(dim),
                           np.array([], dtype=np.int64), cur_dim, next_dim)


def token_embeddings_jsonl(source: TokenEmbeddingFile, sentences) -> str:
    lines = []
    for sent in sentences:
        vecs = source.records[sent.sid]
        lines.append(json.dumps({"sid": sent.sid, "vecs": np.round(vecs, 6).tolist()}))
    return "\n".join(lines) + "\n"


def word_vectors_text(table: WordVectorTable) -> str:
    rows = [f"{len(table)} {table.dim}"]
    for word, i in table.vocab.items():
        rows.append(word + " " + " ".join(repr(float(v)) for v in table.vectors[i]))
    return "\n".join(rows) + "\n"


def conllu_text(sentences) -> str:
    out = []
    for sent in sentences:
        if sent.sid is not None:
            out.append(f"# sent_id = {sent.sid}")
        out.append("# text = " + " ".join(sent.tokens))
        for i, (tok, tag) in enumerate(zip(sent.tokens, sent.tags), start=1):
            out.append("\t".join([str(i), tok, "_", tag, "_", "_", "_", "_", "_", "_"]))
        out.append("")
    return "\n".join(out) + "\n"
