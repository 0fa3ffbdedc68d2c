"""Frequency analysis of embedding dimensions.

Each dimension of a sentence's embedding matrix is a short signal along the
word sequence. Its frequency is the fraction of sign changes between
neighbouring words after the row mean is removed (the normalized sign-change
ratio, NSC). Averaging NSC over a corpus and sorting gives a curve that is cut
into low, mid and high frequency bands.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gwpt.embeddings import EmbeddedSentence
from gwpt.errors import BandError, NSCError

logger = logging.getLogger(__name__)

DEGENERATE_DISTANCE = 1e-9


def nsc_rows(matrix: np.ndarray) -> np.ndarray:
    """NSC of every row of an ``L x M`` matrix. Zero counts as positive."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise NSCError("expected a 2-D matrix")
    m = matrix.shape[1]
    if m < 2:
        raise NSCError("sentence too short for NSC")
    centered = matrix - matrix.mean(axis=1, keepdims=True)
    positive = centered >= 0
    changes = np.count_nonzero(positive[:, 1:] != positive[:, :-1], axis=1)
    return changes / (m - 1)


def nsc(row) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise NSCError("expected a 1-D row")
    return float(nsc_rows(row[None, :])[0])


@dataclass(frozen=True)
class FrequencyProfile:
    avg_nsc: np.ndarray
    sorted_order: np.ndarray
    n_sentences: int = 0

    @property
    def dim(self) -> int:
        return len(self.avg_nsc)

    @property
    def sorted_curve(self) -> np.ndarray:
        return self.avg_nsc[self.sorted_order]


def frequency_profile(corpus: Sequence[EmbeddedSentence]) -> FrequencyProfile:
    """Per-dimension NSC averaged (unweighted) over sentences with >= 2 tokens.

    Per-dimension sums use ``math.fsum`` so the result does not depend on the
    order of the sentences.
    """
    dims = {s.dim for s in corpus}
    if len(dims) > 1:
        raise NSCError(f"sentences have different embedding dims: {sorted(dims)}")
    per_sentence = [nsc_rows(s.matrix) for s in corpus if len(s) >= 2]
    if not per_sentence:
        raise NSCError("no sentence with at least two tokens")
    stacked = np.vstack(per_sentence)
    n = stacked.shape[0]
    avg = np.array([math.fsum(col) / n for col in stacked.T])
    order = np.argsort(avg, kind="stable")
    return FrequencyProfile(avg, order, n)


@dataclass(frozen=True)
class BandPartition:
    """Low/mid/high dimension sets.

    ``cuts = (c1, c2)`` are positions on the sorted-NSC axis: sorted positions
    ``[0, c1)`` are low, ``[c1, c2)`` mid and ``[c2, dim)`` high. The index
    arrays hold original dimension indices in ascending order.
    """

    dim: int
    cuts: tuple[int, int]
    low: np.ndarray
    mid: np.ndarray
    high: np.ndarray

    def band(self, name: str) -> np.ndarray:
        return {"low": self.low, "mid": self.mid, "high": self.high}[name]

    def labels(self) -> list[str]:
        out = [""] * self.dim
        for name in ("low", "mid", "high"):
            for i in self.band(name):
                out[int(i)] = name
        return out


def partition_from_cuts(sorted_order: np.ndarray, cuts: tuple[int, int]) -> BandPartition:
    dim = len(sorted_order)
    c1, c2 = int(cuts[0]), int(cuts[1])
    if not 0 <= c1 <= c2 <= dim:
        raise BandError(f"band cuts {cuts} must satisfy 0 <= c1 <= c2 <= {dim}")
    order = np.asarray(sorted_order, dtype=np.int64)
    return BandPartition(
        dim,
        (c1, c2),
        np.sort(order[:c1]),
        np.sort(order[c1:c2]),
        np.sort(order[c2:]),
    )


def chord_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Perpendicular distance of each point to the line through the end points."""
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    norm = math.hypot(dx, dy)
    if norm == 0:
        return np.zeros_like(x)
    return np.abs(dx * (y - y[0]) - dy * (x - x[0])) / norm


def find_elbow(x: np.ndarray, y: np.ndarray) -> int | None:
    """Index of the point farthest from the end-to-end chord, ``None`` if flat."""
    if len(x) < 3:
        return None
    dist = chord_distances(x, y)
    best = int(np.argmax(dist))
    if dist[best] < DEGENERATE_DISTANCE:
        return None
    return best


def auto_cuts(curve: np.ndarray) -> tuple[int, int]:
    """Elbow cuts of a sorted NSC curve.

    Both axes are scaled to [0, 1] over the whole curve, then one elbow is
    searched in each half. The left elbow is the last low position and the
    right elbow the first high position. A flat half contributes an empty band.
    """
    curve = np.asarray(curve, dtype=np.float64)
    n = len(curve)
    span = curve[-1] - curve[0] if n else 0.0
    if n < 2 or span <= 0:
        logger.warning("flat frequency profile; all dimensions go to the mid band")
        return 0, n
    x = np.arange(n) / (n - 1)
    y = (curve - curve[0]) / span
    half = n // 2

    c1 = 0
    left = find_elbow(x[:half], y[:half])
    if left is None:
        logger.warning("no elbow in the lower half of the frequency curve; low band is empty")
    else:
        c1 = left + 1

    c2 = n
    right = find_elbow(x[half:], y[half:])
    if right is None:
        logger.warning("no elbow in the upper half of the frequency curve; high band is empty")
    else:
        c2 = half + right
    return c1, c2


def partition_bands(profile: FrequencyProfile, method="auto") -> BandPartition:
    """Cut the sorted profile with ``method="auto"`` or explicit ``(c1, c2)`` cuts."""
    if isinstance(method, str):
        if method != "auto":
            raise BandError(f"unknown band method {method!r}")
        cuts = auto_cuts(profile.sorted_curve)
    else:
        cuts = tuple(method)
        if len(cuts) != 2:
            raise BandError("manual band cuts need exactly two positions")
    return partition_from_cuts(profile.sorted_order, cuts)
