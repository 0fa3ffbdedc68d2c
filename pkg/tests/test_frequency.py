import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from gwpt.embeddings import EmbeddedSentence
from gwpt.errors import BandError, NSCError
from gwpt.frequency import (
    auto_cuts,
    frequency_profile,
    nsc,
    nsc_rows,
    partition_bands,
    partition_from_cuts,
)
from oracles import elbow_loop, nsc_loop


def test_nsc_hand_cases():
    assert nsc([1, -1, 1, -1]) == 1.0
    assert nsc([5, 5, 5, 5]) == 0.0
    assert nsc([1, 2, 3, 4]) == pytest.approx(1 / 3, abs=0)


def test_nsc_too_short():
    with pytest.raises(NSCError, match="too short"):
        nsc([1.0])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 20)), elements=finite))
def test_nsc_rows_matches_loop(mat):
    expected = [nsc_loop(list(r)) for r in mat]
    np.testing.assert_array_equal(nsc_rows(mat), expected)


@given(arrays(np.int64, st.integers(2, 30), elements=st.integers(-50, 50)),
       st.integers(-1000, 1000), st.integers(-3, 3))
def test_nsc_shift_and_scale_exact_on_integers(row, shift, log2_scale):
    base = nsc(row.astype(float))
    assert 0.0 <= base <= 1.0
    assert nsc(row + float(shift)) == base
    assert nsc(row * 2.0 ** log2_scale) == base


def _sentence(mat):
    return EmbeddedSentence(np.asarray(mat, dtype=float))


def test_profile_single_sentence():
    mat = np.array([[1, -1, 1, -1], [1, 2, 3, 4]], dtype=float)
    prof = frequency_profile([_sentence(mat)])
    np.testing.assert_array_equal(prof.avg_nsc, nsc_rows(mat))


def test_profile_mean_of_two_and_skips_single_tokens():
    a = np.array([[1, -1, 1], [1, 2, 3]], dtype=float)
    b = np.array([[1, 2], [2, 1]], dtype=float)
    single = np.array([[7.0], [8.0]])
    prof = frequency_profile([_sentence(a), _sentence(single), _sentence(b)])
    np.testing.assert_allclose(prof.avg_nsc, (nsc_rows(a) + nsc_rows(b)) / 2)
    assert prof.n_sentences == 2


def test_profile_order_independent():
    rng = np.random.default_rng(0)
    sents = [_sentence(rng.normal(size=(6, rng.integers(2, 9)))) for _ in range(50)]
    p1 = frequency_profile(sents)
    p2 = frequency_profile(sents[::-1])
    np.testing.assert_array_equal(p1.avg_nsc, p2.avg_nsc)
    np.testing.assert_array_equal(p1.sorted_order, p2.sorted_order)
    assert np.all(np.diff(p1.sorted_curve) >= 0)


def test_profile_needs_eligible_sentence():
    with pytest.raises(NSCError):
        frequency_profile([_sentence([[1.0], [2.0]])])


def test_flat_profile_is_all_mid():
    assert auto_cuts(np.full(40, 0.5)) == (0, 40)


def _oracle_cuts(curve):
    n = len(curve)
    xs = [i / (n - 1) for i in range(n)]
    ys = [(c - curve[0]) / (curve[-1] - curve[0]) for c in curve]
    half = n // 2
    li, ld = elbow_loop(xs[:half], ys[:half])
    ri, rd = elbow_loop(xs[half:], ys[half:])
    c1 = li + 1 if ld >= 1e-9 else 0
    c2 = half + ri if rd >= 1e-9 else n
    return c1, c2


def test_step_curve_cut_at_step():
    # flat zeros up to position 9, then a jump: the left elbow is the last flat point
    curve = np.concatenate([np.zeros(10), np.linspace(0.5, 1.0, 30)])
    c1, _ = auto_cuts(curve)
    assert c1 == _oracle_cuts(curve)[0] == 10


@given(st.lists(st.floats(0, 1), min_size=6, max_size=80))
def test_auto_cuts_match_oracle(values):
    curve = np.sort(np.array(values))
    if curve[-1] - curve[0] <= 0:
        assert auto_cuts(curve) == (0, len(curve))
        return
    c1, c2 = auto_cuts(curve)
    assert (c1, c2) == _oracle_cuts(list(curve))
    assert 0 <= c1 <= c2 <= len(curve)


def test_three_regime_curve():
    curve = np.concatenate([np.full(8, 0.1), np.linspace(0.35, 0.7, 48), np.full(8, 1.0)])
    c1, c2 = auto_cuts(curve)
    assert (c1, c2) == _oracle_cuts(list(curve))
    # the plateaus land in the outer bands; the elbow may sit on either side of a jump
    assert 8 <= c1 <= 10 and 54 <= c2 <= 56


def test_manual_partition_and_errors():
    order = np.array([3, 1, 0, 2, 4])
    p = partition_from_cuts(order, (1, 3))
    assert p.low.tolist() == [3]
    assert p.mid.tolist() == [0, 1]
    assert p.high.tolist() == [2, 4]
    assert p.labels() == ["mid", "mid", "high", "low", "high"]
    with pytest.raises(BandError):
        partition_from_cuts(order, (3, 1))
    with pytest.raises(BandError):
        partition_from_cuts(order, (0, 6))


@given(st.integers(1, 60), st.data())
def test_partition_is_disjoint_cover(dim, data):
    c1 = data.draw(st.integers(0, dim))
    c2 = data.draw(st.integers(c1, dim))
    order = np.random.default_rng(dim).permutation(dim)
    p = partition_from_cuts(order, (c1, c2))
    allidx = np.concatenate([p.low, p.mid, p.high])
    assert sorted(allidx.tolist()) == list(range(dim))
    assert (len(p.low), len(p.mid), len(p.high)) == (c1, c2 - c1, dim - c2)


def test_partition_bands_manual_and_auto():
    rng = np.random.default_rng(3)
    sents = [_sentence(rng.normal(size=(10, 12))) for _ in range(20)]
    prof = frequency_profile(sents)
    p = partition_bands(prof, (2, 7))
    assert p.cuts == (2, 7)
    assert partition_bands(prof).dim == 10
    with pytest.raises(BandError):
        partition_bands(prof, "elbow")
    assert math.isclose(prof.sorted_curve[0], prof.avg_nsc.min())


@pytest.mark.parametrize("dim,cuts,sizes", [(300, (5, 260), (5, 255, 40)), (768, (50, 750), (50, 700, 18))])
def test_preset_cuts_band_sizes(dim, cuts, sizes):
    p = partition_from_cuts(np.random.default_rng(0).permutation(dim), cuts)
    assert (len(p.low), len(p.mid), len(p.high)) == sizes
