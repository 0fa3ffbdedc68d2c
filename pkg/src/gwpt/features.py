"""Adaptive N-gram representation of each token.

Low-band dimensions are dropped. For the mid and high bands each configured
N-gram order contributes one block: the band-restricted columns of a window of
neighbouring tokens, concatenated. Blocks of order >= 2 are reduced with PCA
at a 99% energy threshold. The output is the concatenation of all blocks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from gwpt.embeddings import EmbeddedSentence
from gwpt.errors import ConfigError, DimensionError, PCAError
from gwpt.frequency import BandPartition

logger = logging.getLogger(__name__)

DEFAULT_ENERGY = 0.99
MAX_ORDER = 5
MAX_PCA_SAMPLES = 200_000
BANDS = ("mid", "high")


def window_offsets(n: int) -> range:
    """Token offsets covered by an order-``n`` window: odd orders centred, even extend right."""
    if n < 1:
        raise ValueError("N-gram order must be >= 1")
    return range(-((n - 1) // 2), n // 2 + 1)


def ngram_windows(band_rows: np.ndarray, n: int) -> np.ndarray:
    """All order-``n`` windows of a ``b x M`` band matrix as an ``M x (b*n)`` array.

    Row ``m`` is ``[col(m+o) for o in window_offsets(n)]`` with zero columns
    outside the sentence.
    """
    b, m = band_rows.shape
    offsets = window_offsets(n)
    lo, hi = -offsets[0], offsets[-1]
    padded = np.zeros((b, m + lo + hi))
    padded[:, lo:lo + m] = band_rows
    parts = [padded[:, lo + o:lo + o + m].T for o in offsets]
    return np.hstack(parts) if parts else np.zeros((m, 0))


def extract_ngram_block(sentence: EmbeddedSentence, band: np.ndarray, n: int, m: int) -> np.ndarray:
    if not 0 <= m < len(sentence):
        raise IndexError(f"position {m} outside sentence of length {len(sentence)}")
    rows = sentence.matrix[np.asarray(band, dtype=np.int64)]
    return ngram_windows(rows, n)[m]


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, input_dim), orthonormal rows
    eigenvalues: np.ndarray  # all eigenvalues, descending
    energy_kept: float

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.mean) @ self.components.T

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) @ self.components + self.mean


def fit_pca(samples: np.ndarray, energy_threshold: float = DEFAULT_ENERGY) -> PcaModel:
    """Keep the fewest leading components whose eigenvalue share reaches the threshold."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise PCAError("PCA needs a 2-D sample matrix with at least two rows")
    if not 0 < energy_threshold <= 1:
        raise PCAError(f"energy threshold {energy_threshold} outside (0, 1]")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = np.clip(evals[::-1], 0.0, None)
    evecs = evecs[:, ::-1]
    total = evals.sum()
    if not total > 0:
        raise PCAError("constant block")
    share = np.cumsum(evals) / total
    reached = np.nonzero(share >= energy_threshold)[0]
    k = int(reached[0]) + 1 if len(reached) else len(evals)
    comps = evecs[:, :k].T.copy()
    # sign convention: largest-magnitude entry of each component is positive
    pivots = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), pivots])
    comps *= signs[:, None]
    return PcaModel(mean, comps, evals, float(share[k - 1]))


@dataclass(frozen=True)
class NgramConfig:
    mid: tuple[int, ...] = (1, 2)
    high: tuple[int, ...] = (1, 2, 3)
    pca_on_unigrams: bool = False

    def __post_init__(self):
        for name in BANDS:
            orders = tuple(int(o) for o in getattr(self, name))
            object.__setattr__(self, name, orders)
            if any(o < 1 or o > MAX_ORDER for o in orders):
                raise ConfigError(f"{name} N-gram orders must lie in 1..{MAX_ORDER}: {orders}")
            if any(b <= a for a, b in zip(orders, orders[1:])):
                raise ConfigError(f"{name} N-gram orders must be strictly increasing: {orders}")

    def orders(self, band: str) -> tuple[int, ...]:
        return getattr(self, band)

    def uses_pca(self, order: int) -> bool:
        return order >= 2 or self.pca_on_unigrams


@dataclass(frozen=True)
class Block:
    band: str
    order: int
    input_dim: int
    offset: int
    length: int
    pca: PcaModel | None = None

    @property
    def name(self) -> str:
        return f"{self.band}-{self.order}gram"


@dataclass(frozen=True)
class FeaturePipeline:
    partition: BandPartition
    config: NgramConfig
    blocks: tuple[Block, ...]
    output_dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "output_dim", sum(b.length for b in self.blocks))

    @property
    def input_dim(self) -> int:
        return self.partition.dim

    def layout(self) -> list[dict]:
        return [
            {
                "block": b.name,
                "band": b.band,
                "order": b.order,
                "input_dim": b.input_dim,
                "offset": b.offset,
                "length": b.length,
                "pca": b.pca is not None,
                "energy_kept": None if b.pca is None else b.pca.energy_kept,
            }
            for b in self.blocks
        ]


def _block_specs(partition: BandPartition, cfg: NgramConfig):
    for band in BANDS:
        idx = partition.band(band)
        if len(idx) == 0:
            continue
        for order in cfg.orders(band):
            yield band, order, idx


def _subsample_stride(n_total: int, limit: int) -> int:
    return max(1, -(-n_total // limit))


def fit_pipeline(corpus: Sequence[EmbeddedSentence], partition: BandPartition,
                 cfg: NgramConfig, energy_threshold: float = DEFAULT_ENERGY,
                 max_pca_samples: int = MAX_PCA_SAMPLES) -> FeaturePipeline:
    if not corpus:
        raise DimensionError("cannot fit a feature pipeline on an empty corpus")
    for sent in corpus:
        if sent.dim != partition.dim:
            raise DimensionError(
                f"embedding dim {sent.dim} does not match band partition dim {partition.dim}"
            )
    n_tokens = sum(len(s) for s in corpus)
    stride = _subsample_stride(n_tokens, max_pca_samples)

    blocks = []
    offset = 0
    for band, order, idx in _block_specs(partition, cfg):
        in_dim = len(idx) * order
        pca = None
        if cfg.uses_pca(order):
            windows = np.vstack([ngram_windows(s.matrix[idx], order) for s in corpus])
            if stride > 1:
                windows = windows[::stride]
            try:
                pca = fit_pca(windows, energy_threshold)
            except PCAError as exc:
                raise PCAError(f"block {band}-{order}gram: {exc}") from exc
            length = pca.k
        else:
            length = in_dim
        blocks.append(Block(band, order, in_dim, offset, length, pca))
        offset += length
    if not blocks:
        logger.warning("feature pipeline has no blocks (mid and high bands empty)")
    return FeaturePipeline(partition, cfg, tuple(blocks))


def transform(sentence: EmbeddedSentence, pipeline: FeaturePipeline) -> np.ndarray:
    """Feature matrix of shape ``(len(sentence), pipeline.output_dim)``."""
    if sentence.dim != pipeline.input_dim:
        raise DimensionError(
            f"sentence embedding dim {sentence.dim} != pipeline input dim {pipeline.input_dim}"
        )
    m = len(sentence)
    out = np.empty((m, pipeline.output_dim))
    for block in pipeline.blocks:
        rows = sentence.matrix[pipeline.partition.band(block.band)]
        win = ngram_windows(rows, block.order)
        if block.pca is not None:
            win = block.pca.transform(win)
        out[:, block.offset:block.offset + block.length] = win
    return out


def transform_corpus(corpus: Sequence[EmbeddedSentence], pipeline: FeaturePipeline) -> np.ndarray:
    if not corpus:
        return np.zeros((0, pipeline.output_dim))
    return np.vstack([transform(s, pipeline) for s in corpus])
