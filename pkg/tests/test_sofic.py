import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soficlab import (
    ConfigError,
    FiniteGroup,
    FreeGroup,
    InconsistentHom,
    Integers,
    Lattice,
    SupportTooSmall,
    ball,
    build_cyclic,
    build_quotient,
    build_torus,
    interval,
    quality,
    regular_representation,
    sample_free,
)
from soficlab.groups import cyclic_table, symmetric_table
from soficlab.sofic import RandomSoficModel, compose, identity_perm, invert, is_permutation


@given(st.integers(1, 40), st.integers(-50, 50), st.integers(-50, 50))
def test_cyclic_is_a_homomorphism(n, a, b):
    xi = build_cyclic(n, {a, b, a + b})
    assert np.array_equal(xi.perm(a)[xi.perm(b)], xi.perm(a + b))


def test_cyclic_quality_is_exact():
    xi = build_cyclic(17, interval(-6, 6))
    q = quality(xi, interval(-3, 3))
    assert q.max_hom_defect == 0.0
    assert q.symmetric
    # rotation by g fixes nothing unless g = 0 mod n
    assert q.max_fix_defect == 0.0


def test_small_cycle_has_fixed_points():
    xi = build_cyclic(3, interval(-6, 6))
    q = quality(xi, {0, 1, 3})
    assert q.fix_defect[3] == 1.0
    assert q.fix_defect[1] == 0.0


def test_torus_commutes():
    Z2 = Lattice(2)
    F = ball(Z2, 2)
    xi = build_torus((4, 5), F)
    assert xi.n == 20
    q = quality(xi, ball(Z2, 1))
    assert q.max_hom_defect == 0.0


def test_quotient_from_generator_images():
    Z = Integers()
    n = 7
    shift = (np.arange(n) + 1) % n
    xi = build_quotient(Z, [shift], interval(-3, 3))
    ref = build_cyclic(n, interval(-3, 3))
    for g in interval(-3, 3):
        assert np.array_equal(xi.perm(g), ref.perm(g))
    assert xi.exact_hom and xi.symmetric


def test_quotient_detects_broken_relation():
    C4 = FiniteGroup(cyclic_table(4), generators=[1])
    # a 3-cycle cannot represent a generator of order 4
    with pytest.raises(InconsistentHom):
        build_quotient(C4, [np.array([1, 2, 0])], range(4))


def test_regular_representation_is_free_and_exact():
    table, _ = symmetric_table(3)
    G = FiniteGroup(table)
    xi = regular_representation(G)
    q = quality(xi, range(6))
    assert q.max_hom_defect == 0.0 and q.max_fix_defect == 0.0
    assert all(xi(g, G.identity) == g for g in range(6))


def test_sample_free_is_seeded_and_exact():
    a = sample_free(2, 30, 3, seed=4)
    b = sample_free(2, 30, 3, seed=4)
    F = FreeGroup(2)
    for g in ball(F, 3):
        assert np.array_equal(a.perm(g), b.perm(g))
    assert quality(a, ball(F, 1)).max_hom_defect == 0.0
    assert a.check_symmetric()
    assert RandomSoficModel(2, 30, 3).sample(4).label == a.label


def test_support_errors():
    xi = build_cyclic(5, {0, 1})
    with pytest.raises(SupportTooSmall):
        xi.perm(2)
    with pytest.raises(KeyError):
        xi.require({3})
    assert xi.extended({3}).covers({3})


def test_corruption_breaks_hom():
    xi = build_cyclic(10, interval(-2, 2))
    bad = xi.corrupted(1, 0, 5)
    assert not bad.exact_hom
    assert quality(bad, interval(-1, 1)).max_hom_defect > 0


def test_identity_must_be_identity():
    from soficlab import SoficMap

    with pytest.raises(ConfigError):
        SoficMap(Integers(), 3, {0: np.array([1, 0, 2])})


@given(st.permutations(list(range(8))), st.permutations(list(range(8))))
def test_permutation_helpers(p, q):
    p, q = np.array(p), np.array(q)
    assert is_permutation(compose(p, q))
    assert np.array_equal(compose(p, invert(p)), identity_perm(8))
