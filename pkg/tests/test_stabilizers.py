import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soficlab import (
    Configuration,
    ConfigError,
    Integers,
    PeriodicPoint,
    StabBlock,
    WindowedPoint,
    approx_stabilizer,
    build_cyclic,
    conjugation_check,
    empirical_distribution,
    exact_stabilizer,
    good_vertices,
    interval,
    measure_from_spec,
    neighborhood_constraints,
    sample_free,
)
from soficlab.shift import names_matrix, plant, symbol_distance
from soficlab.stabilizers import StabKernel, conjugation_window, stab_membership_matrix, triple_product_flags

Z = Integers()


def test_exact_stabilizer_of_periodic_point():
    p = PeriodicPoint(Z, [1, 0], 1)
    assert exact_stabilizer(p, interval(-4, 4)).members == {-4, -2, 0, 2, 4}
    assert exact_stabilizer(PeriodicPoint(Z, 3, 2), interval(-1, 1)).members == {-1, 0, 1}


def _window_points(draw, lo=-8, hi=8, depth=2):
    vals = draw(st.lists(st.integers(0, 2**depth - 1), min_size=hi - lo + 1, max_size=hi - lo + 1))
    return WindowedPoint(Z, dict(zip(range(lo, hi + 1), vals)), depth)


@given(st.data(), st.sampled_from([0.3, 0.4, 0.7]))
def test_approx_stabilizer_matches_definition(data, delta):
    p = _window_points(data.draw)
    F = interval(-2, 2)
    F_eval = interval(-3, 3)
    got = approx_stabilizer(p, delta, F, F_eval).members
    want = {g for g in F_eval if all(symbol_distance(p[h], p.translate(g)[h], 2) < delta for h in F)}
    assert got == want


@given(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.sampled_from([0.3, 0.7]))
def test_periodic_and_windowed_agree(pattern, delta):
    p = PeriodicPoint(Z, pattern, 2)
    w = p.restrict(interval(-12, 12))
    F, E = interval(-2, 2), interval(-3, 3)
    assert approx_stabilizer(p, delta, F, E).members == approx_stabilizer(w, delta, F, E).members
    assert exact_stabilizer(p, E).members <= approx_stabilizer(p, delta, F, E).members


def test_kernel_matches_pointwise_stabilizers():
    rng = np.random.default_rng(0)
    xi = build_cyclic(30, interval(-12, 12))
    x = Configuration(rng.integers(0, 4, 30), 2)
    block = StabBlock(3, 0.4, 0.5, interval(-1, 1), interval(-2, 2))
    window = Z.sorted(block.read_window(Z))
    in1, in2 = StabKernel(Z, window, 2, block).membership(names_matrix(x, xi, window))
    F1 = Z.sorted(block.F1)
    for v in range(30):
        name = WindowedPoint(Z, {h: int(x.symbols[(v - h) % 30]) for h in interval(-12, 12)}, 2)
        s1 = approx_stabilizer(name, 0.4, block.F1, block.F1).members
        s2 = approx_stabilizer(name, 0.4, interval(-4, 4), block.F1).members
        assert {g for g, b in zip(F1, in1[v]) if b} == s1
        assert {g for g, b in zip(F1, in2[v]) if b} == s2


def test_constraint_masses_exact_cases():
    block = StabBlock(5, 0.4, 0.01, interval(-2, 2), interval(-2, 2))
    fp = neighborhood_constraints(measure_from_spec("fixed-points", Z, 1), block)
    assert (fp.small_stab_mass, fp.unstable_stab_mass, fp.exact, fp.member) == (0.0, 0.0, True, True)
    per = neighborhood_constraints(measure_from_spec("periodic:01", Z, 1), block)
    # stabilizer meets F1 in {-2, 0, 2}, fewer than M = 5
    assert per.small_stab_mass == 1.0 and not per.member


def test_constraint_masses_empirical_matches_atomic():
    block = StabBlock(3, 0.4, 0.1, interval(-2, 2), interval(-2, 2))
    xi = build_cyclic(12, interval(-12, 12))
    x = Configuration(plant(PeriodicPoint(Z, [0, 1, 1], 1), xi), 1)
    emp = empirical_distribution(x, xi, block.read_window(Z))
    a = neighborhood_constraints(emp, block)
    b = neighborhood_constraints(measure_from_spec("periodic:011", Z, 1), block)
    assert (a.small_stab_mass, a.unstable_stab_mass) == pytest.approx((b.small_stab_mass, b.unstable_stab_mass))


def test_constraint_masses_sampled_fair():
    block = StabBlock(2, 0.3, 0.5, interval(-1, 1), frozenset({0}))
    res = neighborhood_constraints(measure_from_spec("fair", Z, 1), block, samples=20000, seed=1)
    # small event: neither 1 nor -1 stabilizes, probability 1 - (1/8 + 1/8 - 1/16)
    assert not res.exact
    assert abs(res.small_stab_mass - 13 / 16) < 4 * res.stderr[0]
    with pytest.raises(ConfigError):
        neighborhood_constraints(measure_from_spec("fair", Z, 1), block)


def test_good_vertices_on_planted_model():
    xi = build_cyclic(20, interval(-12, 12))
    x = Configuration(plant(PeriodicPoint(Z, [0, 4], 3), xi), 3)
    rep = good_vertices(x, xi, 0.3, 3, interval(-2, 2), interval(-2, 2))
    assert rep.good.all() and not rep.triple_checked
    rep2 = good_vertices(x, xi, 0.3, 4, interval(-2, 2), interval(-2, 2))
    assert not rep2.good.any()
    assert rep2.reasons(0) == ["small_stabilizer"]


def test_triple_products_detect_corruption():
    n = 200
    xi = build_cyclic(n, interval(-12, 12))
    F2 = interval(-1, 1)
    assert triple_product_flags(xi, F2).all()
    flags = triple_product_flags(xi.corrupted(1, 0, 100), F2)
    assert not flags[0] and not flags[100]
    # a triple product moves at most 12 steps, so distant vertices never see the swap
    dist = np.minimum.reduce([np.abs((np.arange(n) - c + n // 2) % n - n // 2) for c in (0, 100)])
    assert flags[dist > 12].all()


def test_membership_matrix_identity_always_member():
    rng = np.random.default_rng(1)
    xi = sample_free(2, 25, 3, seed=0)
    from soficlab import FreeGroup, ball

    x = Configuration(rng.integers(0, 2, 25), 1)
    F1, member = stab_membership_matrix(x, xi, 0.7, ball(FreeGroup(2), 1))
    assert member[:, F1.index(())].all()


@given(st.data(), st.sampled_from([0.4, 0.7]))
def test_conjugation_property(data, delta):
    F1, F2 = interval(-1, 1), interval(-2, 2)
    lo, hi = min(conjugation_window(F1, F2, Z)), max(conjugation_window(F1, F2, Z))
    p = _window_points(data.draw, lo, hi, depth=data.draw(st.integers(1, 3)))
    assert conjugation_check(p, delta, F1, F2).holds


def test_conjugation_rejects_bad_windows():
    p = PeriodicPoint(Z, [0, 1], 1)
    with pytest.raises(ConfigError):
        conjugation_check(p, 0.4, interval(-2, 2), interval(-1, 1))
    with pytest.raises(ConfigError):
        conjugation_check(p, 0.4, {0}, {0, 1})
