"""One-vs-rest gradient boosted regression trees with a logistic objective.

Each class gets its own binary booster (label ``y == c``). Rounds are run in
lockstep over the classes so every forest has the same number of trees, which
is what validation-based early stopping truncates. Trees are grown depth-wise
with exact greedy split search on second-order statistics:

    gain = 1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)]
    leaf = -G/(H+lam)

and the model margin for class ``c`` is ``base_score + lr * sum(tree outputs)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from gwpt.errors import DimensionError, GwptError

logger = logging.getLogger(__name__)

MAX_SHRINK_STEPS = 40


@dataclass(frozen=True)
class BoostParams:
    max_depth: int = 3
    n_trees_per_class: int = 5000
    learning_rate: float = 0.1
    l2_reg: float = 1.0
    min_gain: float = 0.0
    patience: int = 50
    base_score: float = 0.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise GwptError("max_depth must be >= 1")
        if self.n_trees_per_class < 0:
            raise GwptError("n_trees_per_class must be >= 0")
        if self.learning_rate <= 0:
            raise GwptError("learning_rate must be > 0")
        if self.l2_reg < 0 or self.min_gain < 0:
            raise GwptError("l2_reg and min_gain must be >= 0")
        if self.patience < 1:
            raise GwptError("patience must be >= 1")


@dataclass(frozen=True)
class Tree:
    """Array-encoded binary tree; node 0 is the root.

    Internal nodes have ``feature >= 0`` and route ``x[feature] <= threshold``
    to ``left``. Leaves have ``feature == -1`` and output ``value``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_internal(self) -> int:
        return int(np.count_nonzero(self.feature >= 0))

    @property
    def n_leaves(self) -> int:
        return self.n_nodes - self.n_internal

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``x``."""
        node = np.zeros(x.shape[0], dtype=np.int64)
        rows = np.arange(x.shape[0])
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return node
            r = rows[inner]
            n = node[inner]
            go_left = x[r, feat[inner]] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.value[self.apply(x)]


def leaf_tree(value: float = 0.0) -> Tree:
    return Tree(
        np.array([-1], dtype=np.int64),
        np.zeros(1),
        np.array([-1], dtype=np.int64),
        np.array([-1], dtype=np.int64),
        np.array([value], dtype=np.float64),
    )


@dataclass(frozen=True)
class GbdtModel:
    forests: tuple[tuple[Tree, ...], ...]
    n_features: int
    learning_rate: float
    base_score: float = 0.0
    max_depth: int = 3
    history: dict | None = field(default=None, compare=False, repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.forests)

    @property
    def n_trees_per_class(self) -> int:
        return max((len(f) for f in self.forests), default=0)

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.n_features:
            raise DimensionError(f"expected {self.n_features} features, got {x.shape[1]}")
        scores = np.full((x.shape[0], self.n_classes), self.base_score)
        for c, forest in enumerate(self.forests):
            col = scores[:, c]
            for tree in forest:
                col += self.learning_rate * tree.predict(x)
        return scores

    def predict_batch(self, x) -> np.ndarray:
        return np.argmax(self.decision_function(x), axis=1)


def predict(model: GbdtModel, vector) -> tuple[int, np.ndarray]:
    """Class id with the highest one-vs-rest score (ties to the lower id), and all scores."""
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError("predict takes a single feature vector")
    scores = model.decision_function(v)[0]
    return int(np.argmax(scores)), scores


def logistic_loss(y: np.ndarray, margin: np.ndarray) -> float:
    # log(1 + exp(-m)) for y=1, log(1 + exp(m)) for y=0
    z = np.where(y > 0, -margin, margin)
    return float(np.sum(np.logaddexp(0.0, z)))


def _sigmoid(m: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * m))


def _midpoint(a: float, b: float) -> float:
    mid = a + (b - a) / 2.0
    return a if mid >= b else mid


@njit(cache=True)
def _level_splits(order, sorted_x, node_of, g, h, n_nodes, lam):
    """Best split of every node in one tree level.

    One pass per feature over the presorted sample order; a boundary between
    two consecutive distinct values of the same node is a candidate. Ties go
    to the earlier feature and the smaller threshold.
    """
    d, n = order.shape
    g_tot = np.zeros(n_nodes)
    h_tot = np.zeros(n_nodes)
    for i in range(n):
        k = node_of[i]
        if k >= 0:
            g_tot[k] += g[i]
            h_tot[k] += h[i]
    parent = g_tot * g_tot / (h_tot + lam)
    best_gain = np.full(n_nodes, -np.inf)
    best_feat = np.full(n_nodes, -1, dtype=np.int64)
    best_lo = np.zeros(n_nodes)
    best_hi = np.zeros(n_nodes)
    gl = np.zeros(n_nodes)
    hl = np.zeros(n_nodes)
    last = np.zeros(n_nodes)
    seen = np.zeros(n_nodes, dtype=np.bool_)
    for f in range(d):
        gl[:] = 0.0
        hl[:] = 0.0
        seen[:] = False
        for j in range(n):
            i = order[f, j]
            k = node_of[i]
            if k < 0:
                continue
            v = sorted_x[f, j]
            if seen[k] and v > last[k]:
                gr = g_tot[k] - gl[k]
                hr = h_tot[k] - hl[k]
                gain = 0.5 * (gl[k] * gl[k] / (hl[k] + lam) + gr * gr / (hr + lam) - parent[k])
                if gain > best_gain[k]:
                    best_gain[k] = gain
                    best_feat[k] = f
                    best_lo[k] = last[k]
                    best_hi[k] = v
            gl[k] += g[i]
            hl[k] += h[i]
            last[k] = v
            seen[k] = True
    return best_gain, best_feat, best_lo, best_hi


class _Grower:
    """Exact greedy depth-wise tree growth on a fixed, presorted design matrix."""

    def __init__(self, x: np.ndarray, params: BoostParams):
        self.x = x
        self.params = params
        order = np.argsort(x, axis=0, kind="stable")
        self.order = np.ascontiguousarray(order.T)
        self.sorted_x = np.ascontiguousarray(np.take_along_axis(x, order, axis=0).T)

    def grow(self, g: np.ndarray, h: np.ndarray) -> Tree:
        params = self.params
        lam = params.l2_reg
        n = len(g)
        feature, threshold, left, right = [-1], [0.0], [-1], [-1]
        # node_of holds the position of each sample's node within the current level
        node_of = np.zeros(n, dtype=np.int64)
        level = [0]
        final_node = np.zeros(n, dtype=np.int64)
        for _ in range(params.max_depth):
            gains, feats, lo, hi = _level_splits(
                self.order, self.sorted_x, node_of, g, h, len(level), lam
            )
            next_level = []
            child_pos = np.full((len(level), 2), -1, dtype=np.int64)
            for pos, node in enumerate(level):
                if not gains[pos] > params.min_gain:
                    continue
                feature[node] = int(feats[pos])
                threshold[node] = _midpoint(lo[pos], hi[pos])
                for side in range(2):
                    feature.append(-1)
                    threshold.append(0.0)
                    left.append(-1)
                    right.append(-1)
                    child = len(feature) - 1
                    if side == 0:
                        left[node] = child
                    else:
                        right[node] = child
                    child_pos[pos, side] = len(next_level)
                    next_level.append(child)
            if not next_level:
                break
            active = node_of >= 0
            rows = np.nonzero(active)[0]
            pos = node_of[rows]
            split_feat = np.array([feature[level[p]] for p in range(len(level))], dtype=np.int64)
            split_thr = np.array([threshold[level[p]] for p in range(len(level))])
            f = split_feat[pos]
            is_split = f >= 0
            r = rows[is_split]
            p = pos[is_split]
            go_right = (self.x[r, f[is_split]] > split_thr[p]).astype(np.int64)
            new_pos = np.full(n, -1, dtype=np.int64)
            new_pos[r] = child_pos[p, go_right]
            final_node[r] = np.array(next_level, dtype=np.int64)[new_pos[r]]
            node_of = new_pos
            level = next_level

        n_nodes = len(feature)
        g_sum = np.bincount(final_node, weights=g, minlength=n_nodes)
        h_sum = np.bincount(final_node, weights=h, minlength=n_nodes)
        feat_arr = np.array(feature, dtype=np.int64)
        value = np.where(feat_arr < 0, -g_sum / (h_sum + lam), 0.0)
        return Tree(
            feat_arr,
            np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            value,
        )


def _scaled(tree: Tree, factor: float) -> Tree:
    return Tree(tree.feature, tree.threshold, tree.left, tree.right, tree.value * factor)


def tree_penalty(tree: Tree, params: BoostParams) -> float:
    """Complexity term of the applied update ``lr * tree``: min_gain per split plus L2 on leaves."""
    leaves = tree.value[tree.feature < 0] * params.learning_rate
    return params.min_gain * tree.n_internal + 0.5 * params.l2_reg * float(np.sum(leaves ** 2))


def fit(features, labels, params: BoostParams | None = None, n_classes: int | None = None,
        validation: tuple[np.ndarray, np.ndarray] | None = None) -> GbdtModel:
    """Train one-vs-rest boosters.

    ``labels`` are class ids in ``0..n_classes-1``. ``validation`` is an optional
    ``(features, labels)`` pair used for early stopping on error rate.

    After each tree the exact round objective ``loss(F + lr*f) + penalty(f)`` is
    compared with ``loss(F)``; if the Newton step overshoots, leaf values are
    halved until it does not, so the training loss never increases.
    """
    params = params or BoostParams()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise GwptError("need an n x d feature matrix with n >= 2")
    if len(y) != x.shape[0]:
        raise GwptError("label count differs from sample count")
    if not np.all(np.isfinite(x)):
        raise GwptError("non-finite feature values")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if n_classes < 2:
        raise GwptError("need at least two classes")
    if y.min() < 0 or y.max() >= n_classes:
        raise GwptError("label id out of range")

    has_val = validation is not None and len(validation[1]) > 0
    if has_val:
        xv = np.asarray(validation[0], dtype=np.float64)
        yv = np.asarray(validation[1], dtype=np.int64)
        if xv.shape[1] != x.shape[1]:
            raise DimensionError("validation features have a different width")
        val_scores = np.full((xv.shape[0], n_classes), params.base_score)

    grower = _Grower(x, params) if params.n_trees_per_class > 0 else None
    lr = params.learning_rate
    targets = [(y == c).astype(np.float64) for c in range(n_classes)]
    margins = [np.full(x.shape[0], params.base_score) for _ in range(n_classes)]
    forests: list[list[Tree]] = [[] for _ in range(n_classes)]
    history = {
        "train_loss": [[logistic_loss(targets[c], margins[c])] for c in range(n_classes)],
        "objective": [[] for _ in range(n_classes)],
        "val_error": [],
        "shrunk": 0,
    }
    best_rounds, best_err, since_best = 0, np.inf, 0
    if has_val:
        best_err = float(np.mean(np.argmax(val_scores, axis=1) != yv))
        history["val_error"].append(best_err)

    for rnd in range(1, params.n_trees_per_class + 1):
        for c in range(n_classes):
            t, m = targets[c], margins[c]
            p = _sigmoid(m)
            tree = grower.grow(p - t, p * (1.0 - p))
            prev = history["train_loss"][c][-1]
            for _ in range(MAX_SHRINK_STEPS):
                step = lr * tree.predict(x)
                new_m = m + step
                loss = logistic_loss(t, new_m)
                objective = loss + tree_penalty(tree, params)
                if objective <= prev:
                    break
                history["shrunk"] += 1
                tree = _scaled(tree, 0.5)
            else:
                tree = leaf_tree(0.0)
                step = lr * tree.predict(x)
                new_m = m + step
                loss = prev
                objective = prev
            margins[c] = new_m
            forests[c].append(tree)
            history["train_loss"][c].append(loss)
            history["objective"][c].append(objective)
            if has_val:
                val_scores[:, c] += lr * tree.predict(xv)
        if has_val:
            err = float(np.mean(np.argmax(val_scores, axis=1) != yv))
            history["val_error"].append(err)
            if err < best_err:
                best_err, best_rounds, since_best = err, rnd, 0
            else:
                since_best += 1
                if since_best >= params.patience:
                    logger.info("early stop at round %d (best %d, val error %.4f)", rnd, best_rounds, best_err)
                    break
        else:
            best_rounds = rnd

    history["best_rounds"] = best_rounds
    history["best_val_error"] = None if not has_val else best_err
    trimmed = tuple(tuple(f[:best_rounds]) for f in forests)
    return GbdtModel(trimmed, x.shape[1], lr, params.base_score, params.max_depth, history)


def staged_margins(model: GbdtModel, x, c: int) -> np.ndarray:
    """Margins of class ``c`` after 0, 1, ..., T trees, shape ``(T + 1, n)``."""
    x = np.asarray(x, dtype=np.float64)
    out = [np.full(x.shape[0], model.base_score)]
    for tree in model.forests[c]:
        out.append(out[-1] + model.learning_rate * tree.predict(x))
    return np.vstack(out)


# ---- complexity accounting -------------------------------------------------

def tree_params(tree: Tree) -> int:
    """Feature id and threshold per split node, one value per leaf."""
    return 2 * tree.n_internal + tree.n_leaves


def full_tree_params(depth: int) -> int:
    return 2 * (2 ** depth - 1) + 2 ** depth


def count_params(model: GbdtModel) -> int:
    return sum(tree_params(t) for forest in model.forests for t in forest)


def flops_formula(n_trees: int, depth: int, n_classes: int) -> int:
    """One comparison per level plus one addition, per tree and class."""
    return (n_trees * depth + n_trees) * n_classes


def count_flops(model: GbdtModel | None = None, *, n_trees: int | None = None,
                depth: int | None = None, n_classes: int | None = None) -> int:
    if model is not None:
        return flops_formula(model.n_trees_per_class, model.max_depth, model.n_classes)
    if n_trees is None or depth is None or n_classes is None:
        raise TypeError("pass a model or all of n_trees, depth, n_classes")
    return flops_formula(n_trees, depth, n_classes)


def exact_flops(model: GbdtModel) -> int:
    """Worst-case comparisons along each tree's deepest path plus one addition per tree."""
    return sum(t.depth + 1 for forest in model.forests for t in forest)


def empty_model(n_classes: int, n_features: int, base_score: float = 0.0,
                learning_rate: float = 0.1) -> GbdtModel:
    return GbdtModel(tuple(() for _ in range(n_classes)), n_features, learning_rate, base_score)


def full_tree(depth: int, features: Sequence[int], thresholds: Sequence[float],
              leaf_values: Sequence[float]) -> Tree:
    """Complete tree in breadth-first layout (children of ``i`` are ``2i+1``, ``2i+2``)."""
    n_internal = 2 ** depth - 1
    n = 2 * n_internal + 1
    feature = np.full(n, -1, dtype=np.int64)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    threshold = np.zeros(n)
    value = np.zeros(n)
    feature[:n_internal] = features
    threshold[:n_internal] = thresholds
    left[:n_internal] = 2 * np.arange(n_internal) + 1
    right[:n_internal] = 2 * np.arange(n_internal) + 2
    value[n_internal:] = leaf_values
    return Tree(feature, threshold, left, right, value)
