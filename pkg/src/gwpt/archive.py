"""Single-file model archive.

Byte layout (all integers little-endian)::

    magic        4 bytes   b"GWPT"
    version      u32
    n_sections   u32
    section*     n_sections times:
        kind     4 bytes   b"JSON" or b"ARRY"
        length   u64       payload length in bytes
        payload

A JSON payload is UTF-8 with sorted keys and no whitespace. An ARRY payload is::

    name_len u16, name (UTF-8), dtype 1 byte (b"d" float64 | b"q" int64),
    ndim u8, shape u64 * ndim, data (little-endian, C order)

Nothing time- or host-dependent is written, so identical models give
identical bytes.
"""

from __future__ import annotations

import io
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from gwpt import dft, gbdt
from gwpt.corpus_io import TagSet
from gwpt.errors import ArchiveError
from gwpt.features import Block, FeaturePipeline, NgramConfig, PcaModel
from gwpt.frequency import BandPartition, FrequencyProfile
from gwpt.tagger import Tagger

MAGIC = b"GWPT"
FORMAT_VERSION = 1
_DTYPES = {b"d": np.dtype("<f8"), b"q": np.dtype("<i8")}


def _array_payload(name: str, arr: np.ndarray) -> bytes:
    arr = np.asarray(arr)
    if arr.dtype.kind == "f":
        code, arr = b"d", arr.astype("<f8")
    elif arr.dtype.kind in "iub":
        code, arr = b"q", arr.astype("<i8")
    else:
        raise ArchiveError(f"cannot store dtype {arr.dtype} ({name})")
    raw_name = name.encode("utf-8")
    head = struct.pack("<H", len(raw_name)) + raw_name + code + struct.pack("<B", arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + np.ascontiguousarray(arr).tobytes()


def _json_payload(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _section(kind: bytes, payload: bytes) -> bytes:
    return kind + struct.pack("<Q", len(payload)) + payload


def dumps(tagger: Tagger) -> bytes:
    sections: list[bytes] = []

    def arr(name, a):
        sections.append(_section(b"ARRY", _array_payload(name, a)))

    pipe = tagger.pipeline
    model = tagger.model
    meta = {
        "config": tagger.config,
        "fingerprint": tagger.fingerprint,
        "tagset": list(tagger.tagset.symbols),
        "embedding_dim": tagger.partition.dim,
        "band_cuts": list(tagger.partition.cuts),
        "profile_sentences": tagger.profile.n_sentences,
        "ngrams": {
            "mid": list(pipe.config.mid),
            "high": list(pipe.config.high),
            "pca_on_unigrams": pipe.config.pca_on_unigrams,
        },
        "blocks": [
            {
                "band": b.band,
                "order": b.order,
                "input_dim": b.input_dim,
                "offset": b.offset,
                "length": b.length,
                "pca": b.pca is not None,
                "energy_kept": None if b.pca is None else b.pca.energy_kept,
            }
            for b in pipe.blocks
        ],
        "boost": {
            "n_features": model.n_features,
            "learning_rate": model.learning_rate,
            "base_score": model.base_score,
            "max_depth": model.max_depth,
            "n_classes": model.n_classes,
        },
    }
    sections.append(_section(b"JSON", _json_payload(meta)))
    arr("profile/avg_nsc", tagger.profile.avg_nsc)
    arr("profile/sorted_order", tagger.profile.sorted_order)
    for band in ("low", "mid", "high"):
        arr(f"bands/{band}", tagger.partition.band(band))
    for i, b in enumerate(pipe.blocks):
        if b.pca is not None:
            arr(f"pca/{i}/mean", b.pca.mean)
            arr(f"pca/{i}/components", b.pca.components)
            arr(f"pca/{i}/eigenvalues", b.pca.eigenvalues)
    arr("dft/loss", tagger.ranking.loss)
    arr("dft/split", tagger.ranking.split)
    arr("dft/constant", tagger.ranking.constant)
    arr("dft/order", tagger.ranking.order)
    arr("dft/selected", tagger.selected)
    for c, forest in enumerate(model.forests):
        sizes = np.array([t.n_nodes for t in forest], dtype=np.int64)
        arr(f"forest/{c}/sizes", sizes)
        for attr in ("feature", "threshold", "left", "right", "value"):
            parts = [getattr(t, attr) for t in forest]
            dtype = np.float64 if attr in ("threshold", "value") else np.int64
            arr(f"forest/{c}/{attr}", np.concatenate(parts) if parts else np.zeros(0, dtype=dtype))

    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<II", FORMAT_VERSION, len(sections)))
    for s in sections:
        out.write(s)
    return out.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ArchiveError("truncated archive")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _parse_array(payload: bytes) -> tuple[str, np.ndarray]:
    r = _Reader(payload)
    (name_len,) = r.unpack("<H")
    name = r.take(name_len).decode("utf-8")
    code = r.take(1)
    if code not in _DTYPES:
        raise ArchiveError(f"unknown dtype code {code!r} in {name}")
    (ndim,) = r.unpack("<B")
    shape = r.unpack(f"<{ndim}Q")
    dtype = _DTYPES[code]
    count = int(np.prod(shape)) if ndim else 1
    raw = r.take(count * dtype.itemsize)
    if r.pos != len(payload):
        raise ArchiveError(f"trailing bytes in array section {name}")
    arr = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
    return name, arr


def loads(data: bytes) -> Tagger:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise ArchiveError("not a GWPT model archive")
    version, n_sections = r.unpack("<II")
    if version != FORMAT_VERSION:
        raise ArchiveError(
            f"archive format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    meta = None
    arrays: dict[str, np.ndarray] = {}
    for _ in range(n_sections):
        kind = r.take(4)
        (length,) = r.unpack("<Q")
        payload = r.take(length)
        if kind == b"JSON":
            meta = json.loads(payload.decode("utf-8"))
        elif kind == b"ARRY":
            name, a = _parse_array(payload)
            arrays[name] = a
        else:
            raise ArchiveError(f"unknown section kind {kind!r}")
    if r.pos != len(data):
        raise ArchiveError("trailing bytes after the last section")
    if meta is None:
        raise ArchiveError("archive has no metadata section")
    try:
        return _build(meta, arrays)
    except KeyError as exc:
        raise ArchiveError(f"archive is missing {exc}") from None


def _build(meta: dict, arrays: dict[str, np.ndarray]) -> Tagger:
    dim = meta["embedding_dim"]
    profile = FrequencyProfile(arrays["profile/avg_nsc"], arrays["profile/sorted_order"],
                               meta["profile_sentences"])
    partition = BandPartition(dim, tuple(meta["band_cuts"]), arrays["bands/low"],
                              arrays["bands/mid"], arrays["bands/high"])
    ng = meta["ngrams"]
    ngrams = NgramConfig(tuple(ng["mid"]), tuple(ng["high"]), ng["pca_on_unigrams"])
    blocks = []
    for i, b in enumerate(meta["blocks"]):
        pca = None
        if b["pca"]:
            pca = PcaModel(arrays[f"pca/{i}/mean"], arrays[f"pca/{i}/components"],
                           arrays[f"pca/{i}/eigenvalues"], b["energy_kept"])
        blocks.append(Block(b["band"], b["order"], b["input_dim"], b["offset"], b["length"], pca))
    pipeline = FeaturePipeline(partition, ngrams, tuple(blocks))
    ranking = dft.DftRanking(arrays["dft/loss"], arrays["dft/split"],
                             arrays["dft/constant"].astype(bool), arrays["dft/order"])
    boost = meta["boost"]
    forests = []
    for c in range(boost["n_classes"]):
        sizes = arrays[f"forest/{c}/sizes"]
        cols = {a: arrays[f"forest/{c}/{a}"] for a in ("feature", "threshold", "left", "right", "value")}
        trees = []
        start = 0
        for size in sizes:
            end = start + int(size)
            trees.append(gbdt.Tree(*(cols[a][start:end] for a in
                                     ("feature", "threshold", "left", "right", "value"))))
            start = end
        forests.append(tuple(trees))
    model = gbdt.GbdtModel(tuple(forests), boost["n_features"], boost["learning_rate"],
                           boost["base_score"], boost["max_depth"])
    return Tagger(TagSet(tuple(meta["tagset"])), profile, partition, pipeline, ranking,
                  arrays["dft/selected"], model, meta["config"], meta["fingerprint"])


def save(tagger: Tagger, path: str | Path) -> None:
    """Write atomically: the target only appears once the archive is complete."""
    data = dumps(tagger)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=".gwpt-", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load(path: str | Path) -> Tagger:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ArchiveError(f"cannot read archive {path}: {exc.strerror}") from None
    return loads(data)
