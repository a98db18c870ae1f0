import dataclasses

import numpy as np
import pytest

from soficlab import (
    Configuration,
    ConfigError,
    HypothesisViolated,
    Integers,
    PeriodicPoint,
    StabExperimentConfig,
    build_cyclic,
    build_gs,
    build_selector,
    claimA_check,
    claimD_check,
    good_vertices,
    interval,
    run_stab_experiment,
    stab_label,
)
from soficlab.shift import plant

Z = Integers()
F1 = F2 = interval(-2, 2)


@pytest.fixture(scope="module")
def setup():
    xi = build_cyclic(400, interval(-12, 12))
    sel = build_selector(xi, F2, 0.01, seed=3, override=True)
    x = Configuration(plant(PeriodicPoint(Z, [0, 4], 3), xi), 3)
    return xi, sel, x


def test_selector_prefers_core(setup):
    xi, sel, _ = setup
    F2s = Z.sorted(F2)
    for v in range(xi.n):
        hits = [i for i, g in enumerate(F2s) if sel.C[xi(g, v)]]
        if hits:
            assert sel.tau[v] in hits
        assert sel.xi_tau[v] == xi(F2s[sel.tau[v]], v)


def test_selector_size_condition(setup):
    _, sel, _ = setup
    assert sel.cond_I == (sel.core_size < 2 * 400 / np.sqrt(5))


def test_selector_checks_hypotheses():
    xi = build_cyclic(50, interval(-2, 2))
    with pytest.raises(HypothesisViolated):
        build_selector(xi, F2, 0.01, seed=0)


def test_gs_edges_on_cyclic(setup):
    xi, sel, x = setup
    s = stab_label(x, xi, sel.C, 0.3, F1)
    gs = build_gs(xi, sel, s)
    want = set()
    for v in range(xi.n):
        t = sel.xi_tau[v]
        if sel.C[t]:
            # conjugation is trivial on Z
            want |= {(v, (v + f) % xi.n) for f in s.at(t)}
    assert gs.edges() == want
    assert gs.edge_count > 0


def test_claimA_holds_and_detects_corruption(setup):
    xi, sel, x = setup
    good = good_vertices(x, xi, 0.3, 3, F1, F2)
    s = stab_label(x, xi, sel.C, 0.3, F1)
    assert claimA_check(x, build_gs(xi, sel, s), good, sel, 0.3) == []
    c = int(sel.xi_tau[np.flatnonzero(sel.C[sel.xi_tau])[0]])
    bad = s.with_label(c, F1)
    assert len(claimA_check(x, build_gs(xi, sel, bad), good, sel, 0.3)) >= 1


def test_claimD_logic():
    x = Configuration(np.array([0, 0, 0, 0]), 1)
    y = Configuration(np.array([0, 1, 1, 1]), 1)
    D = np.array([True, False, False, False])
    r = claimD_check(x, y, D, 0.3, 0.5)
    assert r.hypothesis and not r.conclusion and not r.holds
    assert r.distance == 0.75
    assert claimD_check(x, y, np.array([0, 1]), 0.3, 0.5).holds


def test_experiment_report(tmp_path):
    cfg = StabExperimentConfig(n=1024)
    rep = run_stab_experiment(cfg, seed=1)
    assert rep["status"] == "ok"
    assert rep["claimA_violations"] == 0
    assert rep["claimD"]["in_hypothesis_violations"] == 0
    assert rep["corrupted_label"]["claimA_violations"] >= 1
    assert rep == run_stab_experiment(cfg, seed=1, threads=3)


def test_experiment_config_validation():
    with pytest.raises(ConfigError):
        run_stab_experiment(dataclasses.replace(StabExperimentConfig(), delta=0.33), seed=0)
    with pytest.raises(ConfigError):
        run_stab_experiment(dataclasses.replace(StabExperimentConfig(), n=1001), seed=0)


def test_selector_conditions_frequency():
    xi = build_cyclic(4096, interval(-8, 8))
    F = interval(-8, 8)
    ok = 0
    for seed in range(100):
        sel = build_selector(xi, F, 0.25, seed=seed, override=True)
        s = sel.summary(0.25)
        ok += s["cond_I"] and s["cond_II"]
    assert ok >= 70


def test_full_core_leaves_nothing_outside():
    xi = build_cyclic(64, interval(-2, 2))
    sel = build_selector(xi, F2, 0.25, seed=0, p=1.0, override=True)
    assert sel.outside_fraction == 0.0
