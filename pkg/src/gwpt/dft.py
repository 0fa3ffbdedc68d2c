"""Discriminant feature test.

Every feature is scored on its own: its value range is cut in two at each of a
set of uniformly spaced points, and the score is the smallest sample-weighted
Shannon entropy (bits) of the class labels on the two sides. Lower is more
discriminant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_GRID = 31
MAX_DFT_SAMPLES = 100_000


def entropy_bits(counts: np.ndarray) -> np.ndarray:
    """Shannon entropy in bits of count vectors along the last axis, 0*log(0) = 0."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def split_grid(lo: float, hi: float, n_grid: int) -> np.ndarray:
    """``n_grid`` points evenly spaced strictly inside ``(lo, hi)``."""
    j = np.arange(1, n_grid + 1)
    return lo + (hi - lo) * j / (n_grid + 1)


def _losses_on_grid(values: np.ndarray, labels: np.ndarray, n_classes: int, grid: np.ndarray):
    n = len(values)
    # first grid index t with values <= grid[t]; the sample is on the left for t >= that index
    first_left = np.searchsorted(grid, values, side="left")
    hist = np.bincount(first_left * n_classes + labels, minlength=(len(grid) + 1) * n_classes)
    hist = hist.reshape(len(grid) + 1, n_classes).astype(np.float64)
    left = np.cumsum(hist[:-1], axis=0)
    total = hist.sum(axis=0)
    right = total - left
    n_left = left.sum(axis=1)
    n_right = n - n_left
    loss = (n_left * entropy_bits(left) + n_right * entropy_bits(right)) / n
    valid = (n_left > 0) & (n_right > 0)
    return loss, valid


def dft_loss_1d(values, labels, n_grid: int = DEFAULT_GRID, n_classes: int | None = None):
    """Best ``(loss, split)`` for one feature; left side is ``value <= split``.

    A constant feature gets the entropy of all labels and its constant value as
    the split.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if values.ndim != 1 or len(values) < 2 or len(labels) != len(values):
        raise ValueError("need at least two values with one label each")
    if n_grid < 1:
        raise ValueError("n_grid must be >= 1")
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        counts = np.bincount(labels, minlength=n_classes)
        return float(entropy_bits(counts)), lo
    grid = split_grid(lo, hi, n_grid)
    loss, valid = _losses_on_grid(values, labels, n_classes, grid)
    if not valid.any():
        counts = np.bincount(labels, minlength=n_classes)
        return float(entropy_bits(counts)), lo
    loss = np.where(valid, loss, np.inf)
    best = int(np.argmin(loss))
    return float(loss[best]), float(grid[best])


@dataclass(frozen=True)
class DftRanking:
    loss: np.ndarray
    split: np.ndarray
    constant: np.ndarray  # bool, non-discriminant constant features
    order: np.ndarray


def rank_features(features, labels, n_grid: int = DEFAULT_GRID, n_classes: int | None = None) -> DftRanking:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
        raise ValueError("need an n x d feature matrix with n >= 2 and d >= 1")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    d = x.shape[1]
    loss = np.empty(d)
    split = np.empty(d)
    constant = np.zeros(d, dtype=bool)
    for j in range(d):
        col = x[:, j]
        constant[j] = col.min() == col.max()
        loss[j], split[j] = dft_loss_1d(col, y, n_grid, n_classes)
    order = np.lexsort((np.arange(d), loss))
    return DftRanking(loss, split, constant, order)


def select_top_k(ranking: DftRanking, k: int) -> np.ndarray:
    d = len(ranking.order)
    if not 1 <= k <= d:
        raise ValueError(f"k={k} outside 1..{d}")
    return np.sort(ranking.order[:k])


def balanced_subsample(labels, limit: int = MAX_DFT_SAMPLES, seed: int = 0) -> np.ndarray:
    """Row indices of a class-balanced subsample of at most ``limit`` rows.

    Returns all rows when there are no more than ``limit``.
    """
    y = np.asarray(labels, dtype=np.int64)
    if len(y) <= limit:
        return np.arange(len(y))
    rng = np.random.default_rng(seed)
    classes = np.unique(y)
    quota = limit // len(classes)
    picked = []
    for c in classes:
        idx = np.nonzero(y == c)[0]
        if len(idx) > quota:
            idx = rng.choice(idx, size=quota, replace=False)
        picked.append(idx)
    return np.sort(np.concatenate(picked))
