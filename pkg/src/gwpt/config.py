"""Run configuration: a flat ``key = value`` text format plus named presets.

Keys (``#`` starts a comment)::

    train, dev, test        corpus paths (.conllu, .tsv or .txt)
    corpus_format           auto | conllu | tsv | text
    embeddings              word-vector text file or token-embedding JSON-lines
    embedding_kind          word | contextual
    subwords                optional token<TAB>subwords map (word vectors only)
    oov_policy              zero | lower-zero | error
    bands                   auto | c1,c2   (sorted positions [0,c1) low, [c1,c2) mid, rest high)
    mid_ngrams, high_ngrams comma-separated N-gram orders
    pca_on_unigrams         true | false
    pca_energy              PCA energy threshold
    dft_k, dft_grid         number of selected features, split grid size
    max_depth, n_trees, learning_rate, l2_reg, min_gain, patience
    seed
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from gwpt.embeddings import OOV_POLICIES
from gwpt.errors import ConfigError
from gwpt.features import NgramConfig
from gwpt.gbdt import BoostParams

PATH_KEYS = ("train", "dev", "test", "embeddings", "subwords")


@dataclass(frozen=True)
class RunConfig:
    train: str | None = None
    dev: str | None = None
    test: str | None = None
    corpus_format: str = "auto"
    embeddings: str | None = None
    embedding_kind: str = "word"
    subwords: str | None = None
    oov_policy: str = "lower-zero"
    bands: str | tuple[int, int] = (5, 260)
    ngrams: NgramConfig = field(default_factory=NgramConfig)
    pca_energy: float = 0.99
    dft_k: int = 500
    dft_grid: int = 31
    boost: BoostParams = field(default_factory=BoostParams)
    seed: int = 0

    def __post_init__(self):
        if self.embedding_kind not in ("word", "contextual"):
            raise ConfigError(f"embedding_kind must be 'word' or 'contextual', not {self.embedding_kind!r}")
        if self.oov_policy not in OOV_POLICIES:
            raise ConfigError(f"oov_policy must be one of {OOV_POLICIES}")
        if self.corpus_format not in ("auto", "conllu", "tsv", "text"):
            raise ConfigError(f"unknown corpus_format {self.corpus_format!r}")
        if isinstance(self.bands, str):
            if self.bands != "auto":
                raise ConfigError(f"bands must be 'auto' or two cut positions, not {self.bands!r}")
        else:
            cuts = tuple(int(c) for c in self.bands)
            if len(cuts) != 2 or not 0 <= cuts[0] <= cuts[1]:
                raise ConfigError(f"bad band cuts {self.bands!r}")
            object.__setattr__(self, "bands", cuts)
        if self.dft_k < 1 or self.dft_grid < 1:
            raise ConfigError("dft_k and dft_grid must be >= 1")
        if not 0 < self.pca_energy <= 1:
            raise ConfigError("pca_energy must lie in (0, 1]")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_flat(self) -> dict[str, str]:
        bands = self.bands if isinstance(self.bands, str) else f"{self.bands[0]},{self.bands[1]}"
        flat = {
            "train": self.train,
            "dev": self.dev,
            "test": self.test,
            "corpus_format": self.corpus_format,
            "embeddings": self.embeddings,
            "embedding_kind": self.embedding_kind,
            "subwords": self.subwords,
            "oov_policy": self.oov_policy,
            "bands": bands,
            "mid_ngrams": ",".join(map(str, self.ngrams.mid)),
            "high_ngrams": ",".join(map(str, self.ngrams.high)),
            "pca_on_unigrams": "true" if self.ngrams.pca_on_unigrams else "false",
            "pca_energy": repr(self.pca_energy),
            "dft_k": str(self.dft_k),
            "dft_grid": str(self.dft_grid),
            "max_depth": str(self.boost.max_depth),
            "n_trees": str(self.boost.n_trees_per_class),
            "learning_rate": repr(self.boost.learning_rate),
            "l2_reg": repr(self.boost.l2_reg),
            "min_gain": repr(self.boost.min_gain),
            "patience": str(self.boost.patience),
            "seed": str(self.seed),
        }
        return {k: v for k, v in flat.items() if v is not None}

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_flat().items())

    def fingerprint(self) -> str:
        """Hash of every setting that affects the fitted model (paths excluded)."""
        flat = {k: v for k, v in self.to_flat().items() if k not in PATH_KEYS}
        blob = json.dumps(flat, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


PRESETS: dict[str, dict[str, str]] = {
    "fasttext-ud": {
        "embedding_kind": "word",
        "bands": "5,260",
        "mid_ngrams": "1,2",
        "high_ngrams": "1,2,3",
        "dft_k": "500",
        "max_depth": "3",
        "n_trees": "5000",
    },
    "bert-ud": {
        "embedding_kind": "contextual",
        "bands": "50,750",
        "mid_ngrams": "1",
        "high_ngrams": "1,2",
        "dft_k": "700",
        "max_depth": "3",
        "n_trees": "4000",
    },
}
KIND_PRESET = {"word": "fasttext-ud", "contextual": "bert-ud"}


def parse_flat(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


def _ints(value: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {value!r}") from None


def _bool(value: str, key: str) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


KNOWN_KEYS = {
    "train", "dev", "test", "corpus_format", "embeddings", "embedding_kind", "subwords",
    "oov_policy", "bands", "mid_ngrams", "high_ngrams", "pca_on_unigrams", "pca_energy",
    "dft_k", "dft_grid", "max_depth", "n_trees", "learning_rate", "l2_reg", "min_gain",
    "patience", "seed",
}


def from_flat(values: dict[str, str]) -> RunConfig:
    """Build a config from flat values, filling gaps from the embedding kind's preset."""
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kind = values.get("embedding_kind", "word")
    if kind not in KIND_PRESET:
        raise ConfigError(f"embedding_kind must be 'word' or 'contextual', not {kind!r}")
    merged = dict(PRESETS[KIND_PRESET[kind]])
    merged.update(values)
    v = merged
    try:
        bands_raw = v.get("bands", "auto")
        bands: str | tuple[int, int]
        if bands_raw == "auto":
            bands = "auto"
        else:
            cuts = _ints(bands_raw, "bands")
            if len(cuts) != 2:
                raise ConfigError("bands: expected 'auto' or two comma-separated cut positions")
            bands = (cuts[0], cuts[1])
        ngrams = NgramConfig(
            _ints(v.get("mid_ngrams", "1,2"), "mid_ngrams"),
            _ints(v.get("high_ngrams", "1,2,3"), "high_ngrams"),
            _bool(v.get("pca_on_unigrams", "false"), "pca_on_unigrams"),
        )
        boost = BoostParams(
            max_depth=int(v.get("max_depth", 3)),
            n_trees_per_class=int(v.get("n_trees", 5000)),
            learning_rate=float(v.get("learning_rate", 0.1)),
            l2_reg=float(v.get("l2_reg", 1.0)),
            min_gain=float(v.get("min_gain", 0.0)),
            patience=int(v.get("patience", 50)),
        )
        return RunConfig(
            train=v.get("train"),
            dev=v.get("dev"),
            test=v.get("test"),
            corpus_format=v.get("corpus_format", "auto"),
            embeddings=v.get("embeddings"),
            embedding_kind=kind,
            subwords=v.get("subwords"),
            oov_policy=v.get("oov_policy", "lower-zero"),
            bands=bands,
            ngrams=ngrams,
            pca_energy=float(v.get("pca_energy", 0.99)),
            dft_k=int(v.get("dft_k", 500)),
            dft_grid=int(v.get("dft_grid", 31)),
            boost=boost,
            seed=int(v.get("seed", 0)),
        )
    except ConfigError:
        raise
    except Exception as exc:  # bad numbers, bad N-gram orders, bad boost params
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None = None, preset: str | None = None,
                overrides: dict[str, str] | None = None) -> RunConfig:
    """Preset values, then the config file, then explicit overrides.

    Relative paths inside the config file resolve against its directory.
    """
    values: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        values.update(PRESETS[preset])
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        file_values = parse_flat(text, str(path))
        # relative paths in a config file are relative to the file itself
        base = Path(path).parent
        for key in PATH_KEYS:
            if key in file_values and not Path(file_values[key]).is_absolute():
                file_values[key] = str(base / file_values[key])
        values.update(file_values)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return from_flat(values)


def preset_config(name: str, **overrides) -> RunConfig:
    return load_config(preset=name, overrides={k: str(v) for k, v in overrides.items()})
