import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soficlab import (
    ConfigError,
    DirectedGraph,
    HypothesisViolated,
    bernoulli_subset,
    build_cyclic,
    domination,
    graph_from_sofic,
    hypothesis_check,
    interval,
    lemma_montecarlo,
    lemma_trial,
    regularity,
)
from soficlab.graphs import build_family, complete_graph, empty_graph, permutation_union, sample_dominating_set, undominated_bruteforce

graphs = st.builds(
    lambda n, edges: DirectedGraph(n, [u % n for u, _ in edges], [v % n for _, v in edges]),
    st.integers(1, 12), st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), max_size=40),
)


@given(graphs, st.data())
def test_domination_matches_bruteforce(g, data):
    W = np.array(data.draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n)), dtype=bool)
    rep = domination(g, W)
    assert rep.undominated_count == undominated_bruteforce(g, W)
    assert rep.subset_size == int(W.sum())


@given(graphs)
def test_edge_list_roundtrip(g):
    assert DirectedGraph.from_edge_list(g.to_edge_list(), g.n).edges() == g.edges()


def test_parallel_edges_merge():
    g = DirectedGraph(3, [0, 0, 1], [1, 1, 2])
    assert g.edge_count == 2
    assert list(g.out_degree()) == [1, 1, 0]


def test_families():
    assert complete_graph(4).edge_count == 16
    assert empty_graph(4).edge_count == 0
    g = permutation_union(50, 3, np.random.default_rng(0))
    assert g.in_degree().max() <= 3 and g.out_degree().max() <= 3
    xi = build_cyclic(10, interval(-1, 1))
    gs = graph_from_sofic(xi, interval(-1, 1))
    assert (gs.out_degree() == 3).all() and (gs.in_degree() == 3).all()
    with pytest.raises(ConfigError):
        build_family("perms:2", 10)


def test_regularity():
    xi = build_cyclic(10, interval(-1, 1))
    rep = regularity(graph_from_sofic(xi, interval(-1, 1)), 3, 3)
    assert rep.is_regular(0.0)
    assert not regularity(empty_graph(5), 1, 1).is_regular(0.5)


def test_hypothesis_check_exact_boundaries():
    # (1 - 1/2)^4 = 1/16 < 1/4 and 4096 > 2 * 16 * 64 = 2048
    assert hypothesis_check(4, 4, 0.25, 4096)
    assert not hypothesis_check(4, 4, 0.25, 2048)
    assert hypothesis_check(4, 4, Fraction(1, 4), 2049)
    # (1 - 1/2)^4 is exactly 1/16, which is not < 1/16
    assert not hypothesis_check(4, 4, Fraction(1, 16), 10**9)
    with pytest.raises(ConfigError):
        hypothesis_check(5, 4, 0.25, 100)


def test_bernoulli_edges():
    assert not bernoulli_subset(10, 0.0, seed=1).any()
    assert bernoulli_subset(10, 1.0, seed=1).all()
    with pytest.raises(ConfigError):
        bernoulli_subset(10, 1.5, seed=1)


def test_lemma_trial_on_complete_graph():
    t = lemma_trial(complete_graph(200), 4, 0.25, seed=0)
    assert t.Y == (0 if t.W_size else 200)


def test_montecarlo_requires_hypotheses():
    with pytest.raises(HypothesisViolated):
        lemma_montecarlo("perms:4", 512, 4, 4, 0.25, 5, seed=0)
    res = lemma_montecarlo("perms:4", 512, 4, 4, 0.25, 5, seed=0, override=True)
    assert not res.in_hypothesis and res.trials == 5


def test_montecarlo_expectation_oracle():
    res = lemma_montecarlo("perms:4", 4096, 4, 4, 0.25, 60, seed=11)
    # E[Y] = sum_v (1 - p)^{outdeg v}; Y is a sum of weakly dependent indicators
    assert abs(res.mean_Y - res.exact_E_Y) < 5 * math.sqrt(res.exact_E_Y * 4 / 60) + 1
    assert res.mean_W == pytest.approx(4096 / 2, rel=0.05)


def test_montecarlo_thread_independent():
    a = lemma_montecarlo("perms:4", 4096, 4, 4, 0.25, 20, seed=2, threads=1)
    b = lemma_montecarlo("perms:4", 4096, 4, 4, 0.25, 20, seed=2, threads=3)
    assert a.to_json(with_trials=True) == b.to_json(with_trials=True)


def test_repaired_dominating_set_dominates():
    g = permutation_union(300, 2, np.random.default_rng(5))
    W = sample_dominating_set(g, 0.1, np.random.default_rng(1))
    assert domination(g, W).undominated_count == 0
