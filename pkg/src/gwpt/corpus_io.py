"""Readers and writers for POS-annotated corpora (CoNLL-U and token/tag TSV)."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO, Union

from gwpt.errors import ParseError, UnknownTagError

logger = logging.getLogger(__name__)

TextSource = Union[str, TextIO, Iterable[str]]


@dataclass(frozen=True)
class TaggedSentence:
    """A tokenized sentence with its gold tags.

    ``tags`` is ``None`` only for unannotated input that is about to be tagged.
    ``sid`` links the sentence to precomputed contextual embeddings.
    """

    tokens: tuple[str, ...]
    tags: tuple[str, ...] | None = None
    sid: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.tags is not None:
            object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.tokens) < 1:
            raise ValueError("a sentence needs at least one token")
        if any(tok == "" for tok in self.tokens):
            raise ValueError("empty token string")
        if self.tags is not None and len(self.tags) != len(self.tokens):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.tags)} tags"
            )

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class TagSet:
    symbols: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate tag symbols")
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def encode(self, tags: Iterable[str]) -> list[int]:
        out = []
        for tag in tags:
            try:
                out.append(self.index[tag])
            except KeyError:
                raise UnknownTagError(
                    f"tag {tag!r} does not occur in the training split"
                ) from None
        return out

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.symbols[i] for i in ids]


def _lines(text: TextSource) -> Iterator[str]:
    if isinstance(text, str):
        yield from io.StringIO(text)
    else:
        yield from text


def parse_conllu(text: TextSource, source: str | None = None) -> list[TaggedSentence]:
    """Read FORM (column 2) and UPOS (column 4) from CoNLL-U.

    Comments, multiword-token ranges (``1-2``) and empty nodes (``1.1``) are
    skipped. A ``# sent_id = ...`` comment becomes the sentence id.
    """
    sentences: list[TaggedSentence] = []
    tokens: list[str] = []
    tags: list[str] = []
    sid: str | None = None
    in_block = False

    def flush(lineno: int):
        nonlocal tokens, tags, sid, in_block
        if tokens:
            sentences.append(TaggedSentence(tuple(tokens), tuple(tags), sid))
        elif in_block:
            logger.warning("sentence block ending at line %d has no tokens; skipped", lineno)
        tokens, tags, sid, in_block = [], [], None, False

    lineno = 0
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush(lineno)
            continue
        in_block = True
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep and key.strip() == "sent_id":
                sid = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"expected 10 tab-separated columns, got {len(cols)}", lineno, source)
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue
        if cols[1] == "":
            raise ParseError("empty FORM column", lineno, source)
        tokens.append(cols[1])
        tags.append(cols[3])
    flush(lineno)
    return sentences


def parse_tsv(text: TextSource, source: str | None = None) -> list[TaggedSentence]:
    """Read ``token<TAB>tag`` lines; blank lines separate sentences."""
    sentences = []
    tokens: list[str] = []
    tags: list[str] = []
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if tokens:
                sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
                tokens, tags = [], []
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(cols)}", lineno, source)
        if cols[0] == "":
            raise ParseError("empty token", lineno, source)
        tokens.append(cols[0])
        tags.append(cols[1])
    if tokens:
        sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
    return sentences


def parse_text(text: TextSource) -> list[TaggedSentence]:
    """One pre-tokenized sentence per line, tokens separated by whitespace."""
    out = []
    for raw in _lines(text):
        toks = raw.split()
        if toks:
            out.append(TaggedSentence(tuple(toks)))
    return out


def write_tsv(sentences: Sequence[TaggedSentence], tags: Sequence[Sequence[str]] | None = None) -> str:
    """Serialize to the TSV format read by :func:`parse_tsv`.

    ``tags`` overrides the sentences' own tags (used for predictions).
    """
    buf = io.StringIO()
    for i, sent in enumerate(sentences):
        sent_tags = tags[i] if tags is not None else sent.tags
        if sent_tags is None:
            raise ValueError("sentence has no tags to write")
        for tok, tag in zip(sent.tokens, sent_tags):
            buf.write(f"{tok}\t{tag}\n")
        buf.write("\n")
    return buf.getvalue()


def build_tagset(sentences: Sequence[TaggedSentence]) -> TagSet:
    if not sentences:
        raise ValueError("cannot build a tag set from an empty corpus")
    seen = set()
    for sent in sentences:
        if sent.tags is None:
            raise ValueError("untagged sentence in training data")
        seen.update(sent.tags)
    return TagSet(tuple(sorted(seen)))


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".conllu", ".conll"):
        return "conllu"
    if suffix in (".txt", ".text"):
        return "text"
    return "tsv"


def read_corpus(path: str | Path, fmt: str | None = None) -> list[TaggedSentence]:
    fmt = fmt or detect_format(path)
    with open(path, encoding="utf-8") as fh:
        if fmt == "conllu":
            return parse_conllu(fh, source=str(path))
        if fmt == "tsv":
            return parse_tsv(fh, source=str(path))
        if fmt == "text":
            return parse_text(fh)
    raise ValueError(f"unknown corpus format {fmt!r}")
