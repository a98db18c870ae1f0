import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from soficlab import ConfigError, FiniteGroup, FreeGroup, Integers, Lattice, ball, group_from_spec, interval
from soficlab.groups import cyclic_table, inverse_set, power_set, symmetric_table, symmetrize

free_words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=6).map(lambda w: FreeGroup(2).prod(*[(x,) for x in w]))
lattice_pts = st.tuples(st.integers(-5, 5), st.integers(-5, 5))
S3 = FiniteGroup(symmetric_table(3)[0])

CASES = [
    (Integers(), st.integers(-20, 20)),
    (Lattice(2), lattice_pts),
    (FreeGroup(2), free_words),
    (S3, st.integers(0, 5)),
]


@pytest.mark.parametrize("group,elems", CASES, ids=["Z", "Z2", "F2", "S3"])
def test_group_axioms(group, elems):
    @given(elems, elems, elems)
    def check(a, b, c):
        mul = group.mul
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(a, group.identity) == a == mul(group.identity, a)
        assert mul(a, group.inv(a)) == group.identity

    check()


@pytest.mark.parametrize("group,elems", CASES, ids=["Z", "Z2", "F2", "S3"])
def test_word_evaluates_to_element(group, elems):
    @given(elems)
    def check(g):
        letters = []
        for i, sign in group.word(g):
            s = group.generators[i]
            letters.append(s if sign > 0 else group.inv(s))
        assert group.prod(*letters) == g
        assert len(letters) == group.length(g)

    check()


@pytest.mark.parametrize("group", [Integers(), Lattice(2), Lattice(3), FreeGroup(2), FreeGroup(3), S3])
def test_ball_size_formula_matches_enumeration(group):
    for r in range(4):
        assert len(ball(group, r)) == group.ball_size(r)


def test_free_ball_sizes():
    assert [FreeGroup(2).ball_size(r) for r in range(5)] == [1, 5, 17, 53, 161]


def test_free_reduction_and_parsing():
    F = FreeGroup(2)
    assert F.parse("aA") == ()
    assert F.parse("abBc".replace("c", "")) == (1,)
    assert F.format(F.parse("aBB")) == "aBB"
    assert F.format(()) == "1"
    with pytest.raises(ConfigError):
        F.parse("c")


def test_free_group_sort_order():
    F = FreeGroup(2)
    assert [F.format(g) for g in F.sorted(ball(F, 1))] == ["1", "a", "A", "b", "B"]


def test_finite_group_rejects_bad_tables():
    with pytest.raises(ConfigError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(ConfigError):
        FiniteGroup(cyclic_table(4), generators=[2])


def test_symmetric_table_composition():
    table, perms = symmetric_table(3)
    for i, j in itertools.product(range(6), repeat=2):
        p, q = perms[i], perms[j]
        assert perms[table[i][j]] == tuple(p[q[k]] for k in range(3))


def test_group_from_spec_roundtrip():
    for s in ["Z", "Z^2", "F3", "cyclic:5", "S3"]:
        g = group_from_spec(s)
        assert group_from_spec(g.to_spec()) == g
    with pytest.raises(ConfigError):
        group_from_spec("Q")


def test_set_helpers():
    Z = Integers()
    F = interval(-1, 1)
    assert power_set(F, 3, Z) == interval(-3, 3)
    assert power_set(F, 0, Z) == {0}
    assert inverse_set({1, 2}, Z) == {-1, -2}
    assert symmetrize({2}, Z) == {-2, 0, 2}
    with pytest.raises(ConfigError):
        ball(Z, -1)
