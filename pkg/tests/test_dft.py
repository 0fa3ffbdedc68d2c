import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwpt.dft import (
    balanced_subsample,
    dft_loss_1d,
    entropy_bits,
    rank_features,
    select_top_k,
    split_grid,
)
from oracles import best_midpoint_split, entropy


def test_entropy_bits():
    assert entropy_bits([2, 2]) == pytest.approx(1.0)
    assert entropy_bits([5, 0]) == 0.0
    assert entropy_bits([0, 0]) == 0.0


def test_grid_strictly_inside():
    g = split_grid(0.0, 1.0, 31)
    assert len(g) == 31 and g[0] > 0 and g[-1] < 1
    np.testing.assert_allclose(np.diff(g), 1 / 32)


def test_separable_zero():
    loss, split = dft_loss_1d([0, 0.1, 0.9, 1], [0, 0, 1, 1])
    assert loss == 0.0
    assert 0.1 <= split < 0.9


def test_single_class_zero():
    loss, _ = dft_loss_1d([3, 1, 2, 5], [1, 1, 1, 1], n_classes=2)
    assert loss == 0.0


def test_alternating_example():
    loss, split = dft_loss_1d([0, 1, 2, 3], [0, 1, 0, 1], n_grid=31)
    expected = best_midpoint_split([0, 1, 2, 3], [0, 1, 0, 1])
    assert expected == pytest.approx(0.75 * entropy([0, 1, 1]))
    assert loss == pytest.approx(expected, abs=1e-12)
    # ties go to the smallest split: left = {0}
    assert split < 1


def test_constant_feature():
    loss, split = dft_loss_1d([2.0, 2.0, 2.0, 2.0], [0, 1, 0, 1])
    assert loss == pytest.approx(1.0)
    assert split == 2.0


def _reachable_instance(rng):
    """Integer values in 0..K with both ends present; grid 2K-1 hits every midpoint."""
    k = int(rng.integers(1, 12))
    n = int(rng.integers(2, 65))
    values = rng.integers(0, k + 1, size=n)
    values[0], values[-1] = 0, k
    labels = rng.integers(0, int(rng.integers(2, 5)), size=n)
    return values.astype(float), labels, 2 * k - 1


@settings(deadline=None, max_examples=100)
@given(st.integers(0, 2 ** 32 - 1))
def test_grid_equals_midpoint_oracle(seed):
    values, labels, n_grid = _reachable_instance(np.random.default_rng(seed))
    loss, _ = dft_loss_1d(values, labels, n_grid)
    assert abs(loss - best_midpoint_split(list(values), list(labels))) <= 1e-12


def test_grid_never_beats_oracle_on_arbitrary_values():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        values = rng.normal(size=n)
        labels = rng.integers(0, 3, size=n)
        loss, _ = dft_loss_1d(values, labels, 31)
        assert loss >= best_midpoint_split(list(values), list(labels)) - 1e-12


def test_ranking_separable_before_shuffled():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, size=200)
    a = y + rng.uniform(-0.3, 0.3, size=200)
    b = rng.permutation(a)
    r = rank_features(np.column_stack([b, a]), y)
    assert r.order.tolist() == [1, 0]
    assert r.loss[1] == 0.0


def test_ranking_ties_lower_index_first():
    rng = np.random.default_rng(1)
    col = rng.normal(size=30)
    r = rank_features(np.column_stack([col, col, col]), rng.integers(0, 2, size=30))
    assert r.order.tolist() == [0, 1, 2]


def test_ranking_single_feature():
    r = rank_features(np.array([[0.0], [1.0], [2.0]]), [0, 1, 1])
    assert r.order.tolist() == [0]


def test_ranking_flags_constant():
    x = np.column_stack([np.ones(6), np.arange(6.0)])
    r = rank_features(x, [0, 0, 0, 1, 1, 1])
    assert r.constant.tolist() == [True, False]


def test_select_top_k():
    r = rank_features(np.random.default_rng(2).normal(size=(20, 5)), np.arange(20) % 2)
    assert select_top_k(r, 5).tolist() == [0, 1, 2, 3, 4]
    assert sorted(select_top_k(r, 2).tolist()) == sorted(r.order[:2].tolist())
    for bad in (0, 6):
        with pytest.raises(ValueError):
            select_top_k(r, bad)


def test_balanced_subsample():
    y = np.array([0] * 900 + [1] * 80 + [2] * 20)
    idx = balanced_subsample(y, 300, seed=4)
    counts = np.bincount(y[idx], minlength=3)
    assert len(idx) <= 300
    assert counts[1] == 80 and counts[2] == 20 and counts[0] >= 100
    np.testing.assert_array_equal(idx, balanced_subsample(y, 300, seed=4))
    assert len(balanced_subsample(y, 5000)) == len(y)
