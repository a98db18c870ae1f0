import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soficlab import (
    Configuration,
    EmptyRestriction,
    FinitePointSet,
    LengthMismatch,
    TooLarge,
    dinf,
    dV,
    exact_covering,
    exact_separated,
    greedy_separated,
    log_ball_volume,
    product_bound_check,
    sep_cov_sandwich,
)
from soficlab.metrics import alphabet_separation


def test_distances_oracle():
    x = Configuration.from_bits(["00", "00", "11"])
    y = Configuration.from_bits(["01", "10", "11"])
    # site distances 1/2, 1, 0
    assert dV(x, y) == pytest.approx(0.5)
    assert dinf(x, y, [0, 2]) == 0.5
    assert dinf(x, y, [0, 1]) == 1.0
    with pytest.raises(EmptyRestriction):
        dinf(x, y, [])
    with pytest.raises(LengthMismatch):
        dV(x, Configuration.from_bits(["00"]))


point_sets = st.builds(
    lambda k, sites, depth, seed: FinitePointSet(np.random.default_rng(seed).integers(0, 2**depth, size=(k, sites)), depth),
    st.integers(1, 9), st.integers(1, 4), st.integers(1, 2), st.integers(0, 2**32 - 1),
)


def _brute_sep(S, delta):
    D = S.distance_matrix()
    best = 0
    for r in range(1, len(S) + 1):
        for sub in itertools.combinations(range(len(S)), r):
            if all(D[i, j] > delta for i, j in itertools.combinations(sub, 2)):
                best = r
    return best


def _brute_cov(S, delta):
    D = S.distance_matrix()
    k = len(S)
    for r in range(1, k + 1):
        for centres in itertools.combinations(range(k), r):
            if all(min(D[c, j] for c in centres) <= delta for j in range(k)):
                return r
    return k


@given(point_sets, st.sampled_from([0.1, 0.2, 0.3, 0.45, 0.6]))
def test_exact_counts_match_brute_force(S, delta):
    assert exact_separated(S, delta) == _brute_sep(S, delta)
    assert exact_covering(S, delta) == _brute_cov(S, delta)


@given(point_sets, st.sampled_from([0.2, 0.3, 0.45]))
def test_sandwich(S, delta):
    s = sep_cov_sandwich(S, delta)
    assert s.holds, s


@given(point_sets, st.sampled_from([0.2, 0.45]))
def test_greedy_is_separated_and_maximal(S, delta):
    kept = greedy_separated(S, delta)
    D = S.distance_matrix()
    assert all(D[i, j] > delta for i, j in itertools.combinations(kept, 2))
    assert all(min(D[i, k] for k in kept) <= delta for i in range(len(S)))


def test_cap_enforced():
    S = FinitePointSet(np.zeros((30, 2), dtype=int), 1)
    with pytest.raises(TooLarge):
        exact_separated(S, 0.3)


@pytest.mark.parametrize("m,delta,expected", [(6, 0.015, 64), (3, 0.3, 4), (3, 0.15, 8), (2, 0.6, 2), (4, 1.0, 1)])
def test_alphabet_separation_values(m, delta, expected):
    assert alphabet_separation(m, delta) == expected


def test_alphabet_separation_by_enumeration():
    for m in (1, 2, 3):
        for delta in (0.1, 0.2, 0.3, 0.6):
            pts = FinitePointSet(np.arange(2**m)[:, None], m)
            assert exact_separated(pts, delta) == alphabet_separation(m, delta)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("Dsize", [1, 2, 3])
@pytest.mark.parametrize("delta", [0.2, 0.3, 0.6])
def test_product_bound(m, Dsize, delta):
    r = product_bound_check(m, Dsize, delta)
    assert r.holds
    # under the max metric the product separation is exactly a power
    assert r.sep_product == alphabet_separation(m, 2 * delta) ** Dsize


@pytest.mark.parametrize("n,m,delta", [(3, 1, 0.34), (4, 2, 0.3), (5, 2, 0.5), (3, 3, 0.2), (6, 1, 0.0)])
def test_ball_volume_by_enumeration(n, m, delta):
    pts = np.array(list(itertools.product(range(2**m), repeat=n)))
    centre = np.zeros((1, n), dtype=int)
    S = FinitePointSet(pts, m)
    d = S._table[pts ^ centre].mean(axis=1)
    closed = int(np.count_nonzero(d <= delta + 1e-12))
    assert math.exp(log_ball_volume(n, m, delta, closed=True)) == pytest.approx(closed)
    opened = int(np.count_nonzero(d < delta - 1e-12))
    if opened:
        assert math.exp(log_ball_volume(n, m, delta, closed=False)) == pytest.approx(opened)


def test_ball_volume_large_n_is_finite():
    v = log_ball_volume(2000, 1, 0.01)
    # binomial tail: log sum_{i<=20} C(2000, i)
    exact = math.log(sum(math.comb(2000, i) for i in range(21)))
    assert v == pytest.approx(exact, rel=1e-9)
