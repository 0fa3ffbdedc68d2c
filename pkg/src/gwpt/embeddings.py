"""Word-vector tables, precomputed contextual vectors, and sentence embedding.

Two sources are supported:

* a word-vector table in the common text format (header ``count dim``, then
  ``token v1 ... vL`` per line), as distributed for fastText;
* a JSON-lines file of per-token contextual vectors, one record
  ``{"sid": ..., "vecs": [[...], ...]}`` per sentence.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from typing import Collection, Iterable, Mapping, Sequence, TextIO, Union

import numpy as np

from gwpt.corpus_io import TaggedSentence
from gwpt.errors import EmbeddingError, OOVError, ParseError

logger = logging.getLogger(__name__)

OOV_POLICIES = ("zero", "lower-zero", "error")
DEFAULT_OOV_POLICY = "lower-zero"


@dataclass(frozen=True)
class WordVectorTable:
    dim: int
    vocab: dict[str, int]
    vectors: np.ndarray  # (len(vocab), dim)

    def __post_init__(self):
        if self.vectors.shape != (len(self.vocab), self.dim):
            raise EmbeddingError(
                f"vector matrix shape {self.vectors.shape} does not match "
                f"{len(self.vocab)} entries of dim {self.dim}"
            )

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def get(self, token: str, lowercase_fallback: bool = False) -> np.ndarray | None:
        row = self.vocab.get(token)
        if row is None and lowercase_fallback:
            row = self.vocab.get(token.lower())
        return None if row is None else self.vectors[row]


@dataclass(frozen=True)
class TokenEmbeddingFile:
    dim: int
    records: dict[str, np.ndarray] = field(repr=False)  # sid -> (n_tokens, dim)

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class EmbeddedSentence:
    """Embedding matrix of one sentence: ``dim`` rows by ``len(sentence)`` columns."""

    matrix: np.ndarray
    tags: tuple[str, ...] | None = None
    oov: tuple[bool, ...] | None = None

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] < 1:
            raise EmbeddingError(f"bad embedding matrix shape {self.matrix.shape}")
        if self.tags is not None and len(self.tags) != self.matrix.shape[1]:
            raise EmbeddingError("tag count differs from column count")
        if not np.all(np.isfinite(self.matrix)):
            raise EmbeddingError("non-finite embedding value")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __len__(self) -> int:
        return self.matrix.shape[1]


def _open_lines(stream: Union[str, TextIO, Iterable[str]]):
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def load_word_vectors(stream, vocab_filter: Collection[str] | None = None,
                      source: str | None = None) -> WordVectorTable:
    """Parse the text word-vector format.

    With ``vocab_filter`` only the listed tokens are kept (the full fastText
    Wikipedia table does not fit comfortably in memory as float64), but every
    row is still validated.
    """
    lines = iter(_open_lines(stream))
    try:
        header = next(lines)
    except StopIteration:
        raise ParseError("empty word-vector file", 1, source) from None
    parts = header.split()
    if len(parts) != 2:
        raise ParseError("header must be 'count dim'", 1, source)
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError("header must be 'count dim'", 1, source) from None
    if dim < 1 or count < 0:
        raise ParseError("bad header values", 1, source)

    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    n_rows = 0
    for lineno, raw in enumerate(lines, start=2):
        line = raw.rstrip("\r\n").rstrip(" ")
        if not line:
            continue
        fields = line.split(" ")
        if len(fields) != dim + 1 or fields[0] == "":
            raise ParseError(
                f"expected a token and {dim} values, got {len(fields) - 1} values", lineno, source
            )
        n_rows += 1
        token = fields[0]
        if vocab_filter is not None and token not in vocab_filter:
            try:
                float(fields[-1])
            except ValueError:
                raise ParseError(f"non-numeric value {fields[-1]!r}", lineno, source) from None
            continue
        try:
            vec = np.array([float(v) for v in fields[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"non-numeric value ({exc})", lineno, source) from None
        if token in vocab:
            logger.warning("duplicate token %r at line %d; last one wins", token, lineno)
            rows[vocab[token]] = vec
        else:
            vocab[token] = len(rows)
            rows.append(vec)
    if n_rows != count:
        logger.warning("header announces %d rows but %d were read", count, n_rows)
    vectors = np.vstack(rows) if rows else np.zeros((0, dim))
    return WordVectorTable(dim, vocab, vectors)


def load_token_embeddings(stream, source: str | None = None) -> TokenEmbeddingFile:
    records: dict[str, np.ndarray] = {}
    dim = None
    for lineno, raw in enumerate(_open_lines(stream), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            sid = str(obj["sid"])
            vecs = obj["vecs"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"bad record ({exc})", lineno, source) from None
        if not vecs:
            raise EmbeddingError(f"sentence {sid!r} has no vectors")
        lengths = {len(v) for v in vecs}
        if len(lengths) != 1:
            raise EmbeddingError(f"ragged vector lengths in sentence {sid!r}")
        length = lengths.pop()
        if dim is None:
            dim = length
        elif length != dim:
            raise EmbeddingError(
                f"sentence {sid!r} has vectors of length {length}, expected {dim}"
            )
        try:
            arr = np.asarray(vecs, dtype=np.float64)
        except (TypeError, ValueError):
            raise ParseError(f"non-numeric vector in sentence {sid!r}", lineno, source) from None
        if sid in records:
            logger.warning("duplicate sentence id %r; last one wins", sid)
        records[sid] = arr
    if dim is None:
        raise EmbeddingError("no records")
    return TokenEmbeddingFile(dim, records)


def load_subword_map(stream) -> dict[str, tuple[str, ...]]:
    """``token<TAB>unit unit ...`` per line."""
    out = {}
    for lineno, raw in enumerate(_open_lines(stream), start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        token, sep, units = line.partition("\t")
        if not sep or not units.split():
            raise ParseError("expected 'token<TAB>subword subword ...'", lineno)
        out[token] = tuple(units.split())
    return out


def mean_pool(vectors: Sequence[np.ndarray]) -> np.ndarray:
    return np.mean(np.vstack(vectors), axis=0)


def _lookup(table: WordVectorTable, token: str, policy: str,
            subwords: Mapping[str, Sequence[str]] | None) -> np.ndarray | None:
    lower = policy == "lower-zero"
    if subwords is not None and token in subwords:
        found = [v for v in (table.get(u, lower) for u in subwords[token]) if v is not None]
        if found:
            return mean_pool(found)
        return None
    return table.get(token, lower)


def sentence_id(sentence: TaggedSentence, position: int) -> str:
    return sentence.sid if sentence.sid is not None else str(position)


def embed_corpus(sentences: Sequence[TaggedSentence],
                 source: WordVectorTable | TokenEmbeddingFile,
                 oov_policy: str = DEFAULT_OOV_POLICY,
                 subwords: Mapping[str, Sequence[str]] | None = None) -> list[EmbeddedSentence]:
    """Turn tagged sentences into embedding matrices.

    For a contextual source, sentence ``i`` is matched to the record whose
    sid is ``sentence.sid`` (or ``str(i)`` when the sentence has none).
    """
    if oov_policy not in OOV_POLICIES:
        raise EmbeddingError(f"unknown OOV policy {oov_policy!r}; expected one of {OOV_POLICIES}")
    out = []
    if isinstance(source, TokenEmbeddingFile):
        for i, sent in enumerate(sentences):
            sid = sentence_id(sent, i)
            vecs = source.records.get(sid)
            if vecs is None:
                raise EmbeddingError(f"no contextual vectors for sentence {sid!r}")
            if vecs.shape[0] != len(sent):
                raise EmbeddingError(
                    f"sentence {sid!r} has {len(sent)} tokens but {vecs.shape[0]} vectors"
                )
            out.append(EmbeddedSentence(vecs.T.copy(), sent.tags, (False,) * len(sent)))
        return out

    dim = source.dim
    for sent in sentences:
        cols = np.zeros((dim, len(sent)))
        oov = []
        for m, tok in enumerate(sent.tokens):
            vec = _lookup(source, tok, oov_policy, subwords)
            if vec is None:
                if oov_policy == "error":
                    raise OOVError(tok)
                oov.append(True)
            else:
                cols[:, m] = vec
                oov.append(False)
        out.append(EmbeddedSentence(cols, sent.tags, tuple(oov)))
    return out


def corpus_vocabulary(sentences: Iterable[TaggedSentence],
                      subwords: Mapping[str, Sequence[str]] | None = None) -> set[str]:
    """Every string a table lookup for these sentences could ask for."""
    vocab = set()
    for sent in sentences:
        for tok in sent.tokens:
            units = subwords.get(tok, (tok,)) if subwords else (tok,)
            for u in units:
                vocab.add(u)
                vocab.add(u.lower())
    return vocab
