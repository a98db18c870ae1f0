import math

import pytest

from soficlab import ConfigError, Infeasible, Integers, measure_from_spec, plan_parameters, separation_bound
from soficlab.planner import checked_tail_sup, domination_tail

Z = Integers()


@pytest.fixture(scope="module")
def plan():
    return plan_parameters(1.0, 6, measure_from_spec("constant", Z, 6))


def test_constant_measure_plan(plan):
    assert plan.all_hold
    assert plan.separation_bound() < 1.0
    assert {c.name for c in plan.constraints} >= {
        "epsilon_range", "delta_margin", "delta_stabilizer_approx", "M_domination", "M_alphabet",
        "F1_stabilizer_mass", "F2_label_cost", "V_size", "closing_bound"}


def test_constant_measure_values(plan):
    assert plan.eps == pytest.approx(0.009)
    assert plan.delta == pytest.approx(0.03)
    # brute force: smallest M with (4/sqrt M) log 64 < 1/2
    M = next(M for M in range(1, 10**5) if 4 / math.sqrt(M) * math.log(64) < 0.5)
    assert plan.M == M == 1107
    assert plan.F1_size == 2 * plan.F1_radius + 1 > plan.M
    assert plan.F1_size - 2 <= plan.M
    assert 4 / math.sqrt(plan.F2_size) * plan.F1_size * math.log(2) < 0.5
    assert plan.min_vertices > 2 * plan.F2_size**2 * (plan.eps / 3) ** -3 * (1 - 1e-9)


def test_fair_measure_is_infeasible():
    with pytest.raises(Infeasible) as info:
        plan_parameters(1.0, 6, measure_from_spec("fair", Z, 6), sample_size=2000, seed=0)
    assert info.value.condition == "F1_stabilizer_mass"


def test_periodic_measure_fails_on_stabilizer_size():
    # a period-2 point is stabilized by the even elements only: about half of F1, below M
    with pytest.raises(Infeasible) as info:
        plan_parameters(1.0, 2, measure_from_spec("periodic:0,3", Z, 2))
    assert info.value.condition == "F1_stabilizer_mass"


def test_input_validation():
    with pytest.raises(ConfigError):
        plan_parameters(1.5, 2, measure_from_spec("constant", Z, 2))
    with pytest.raises(ConfigError):
        plan_parameters(1.0, 3, measure_from_spec("constant", Z, 2))


def test_separation_bound_formula():
    got = separation_bound(5, 100, 16, 0.3, 3)
    # sep_{0.15} of the depth-3 alphabet is 8
    assert got == pytest.approx(0.4 * 5 * math.log(2) + 1.0 * math.log(8))


def test_tail_helpers():
    assert domination_tail(4) == pytest.approx(1 / 16)
    direct = max(domination_tail(n) for n in range(51, 5000))
    assert checked_tail_sup(50, horizon=4949) >= direct
    assert checked_tail_sup(1107) < 0.003
