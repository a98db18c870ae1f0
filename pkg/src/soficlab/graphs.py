"""Finite digraphs and a harness for the randomized dominating-set lemma.

The lemma: if ``G`` is ``(kappa, k, M)``-regular, ``(1 - 1/sqrt k)^k < kappa`` and
``|V| > 2 M^2 kappa^-3``, then a ``1/sqrt(k)``-Bernoulli set is
``3 kappa``-dominating and has at most ``2|V|/sqrt(k)`` vertices with
probability at least ``1 - kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from ._rng import map_ordered, rng_for
from .errors import ConfigError, HypothesisViolated
from .sofic import SoficMap


class DirectedGraph:
    """Simple digraph on ``range(n)``; self-loops allowed, parallel edges merged."""

    def __init__(self, n: int, src, dst):
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ConfigError("src and dst differ in length")
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ConfigError("edge endpoint out of range")
        code = np.unique(src * n + dst)
        self.n = int(n)
        self.src = code // n
        self.dst = code % n
        for a in (self.src, self.dst):
            a.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n)

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n)

    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def adjacency_lists(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in zip(self.src.tolist(), self.dst.tolist()):
            out[u].append(v)
        return out

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in zip(self.src.tolist(), self.dst.tolist()))

    @classmethod
    def from_edge_list(cls, text: str, n: int | None = None) -> "DirectedGraph":
        pairs = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                u, v = line.split()
                pairs.append((int(u), int(v)))
        arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        if n is None:
            n = int(arr.max()) + 1 if len(arr) else 0
        return cls(n, arr[:, 0], arr[:, 1])


def complete_graph(n: int) -> DirectedGraph:
    u, v = np.divmod(np.arange(n * n), n)
    return DirectedGraph(n, u, v)


def empty_graph(n: int) -> DirectedGraph:
    return DirectedGraph(n, [], [])


def permutation_union(n: int, j: int, rng: np.random.Generator) -> DirectedGraph:
    """Edges ``(v, p_i(v))`` for ``j`` independent uniform permutations ``p_i``."""
    src = np.tile(np.arange(n), j)
    dst = np.concatenate([rng.permutation(n) for _ in range(j)]) if j else np.array([], dtype=np.int64)
    return DirectedGraph(n, src, dst)


def graph_from_sofic(xi: SoficMap, F: Iterable) -> DirectedGraph:
    """Edge ``(u, xi_g(u))`` for every ``g`` in ``F``."""
    F = xi.group.sorted(F)
    xi.require(F)
    if not F:
        return empty_graph(xi.n)
    src = np.tile(np.arange(xi.n), len(F))
    dst = np.concatenate([xi.perm(g) for g in F])
    return DirectedGraph(xi.n, src, dst)


def build_family(spec: str, n: int, rng: np.random.Generator | None = None) -> DirectedGraph:
    """``complete``, ``empty``, ``perms:J`` or ``edges:PATH``."""
    kind, _, arg = spec.partition(":")
    if kind == "complete":
        return complete_graph(n)
    if kind == "empty":
        return empty_graph(n)
    if kind == "perms":
        if rng is None:
            raise ConfigError("random family needs a generator")
        return permutation_union(n, int(arg), rng)
    if kind == "edges":
        return DirectedGraph.from_edge_list(Path(arg).read_text(), n)
    raise ConfigError(f"unknown graph family {spec!r}")


@dataclass
class RegularityReport:
    low_outdegree_fraction: float
    max_indegree: int
    k: int
    M: int

    def is_regular(self, eps: float) -> bool:
        return self.low_outdegree_fraction <= eps and self.max_indegree <= self.M

    def to_json(self) -> dict:
        return dict(self.__dict__)


def regularity(graph: DirectedGraph, k: int, M: int) -> RegularityReport:
    out = graph.out_degree()
    low = float(np.count_nonzero(out < k)) / graph.n if graph.n else 0.0
    mx = int(graph.in_degree().max()) if graph.n else 0
    return RegularityReport(low, mx, k, M)


def bernoulli_subset(n: int, p: float, seed: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Boolean mask; vertex ``v`` is included independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ConfigError("p must lie in [0, 1]")
    if rng is None:
        rng = rng_for(seed, 2)
    return rng.random(n) < p


def _as_mask(W, n: int) -> np.ndarray:
    W = np.asarray(W)
    if W.dtype == bool:
        if W.shape != (n,):
            raise ConfigError("mask length differs from vertex count")
        return W
    mask = np.zeros(n, dtype=bool)
    if W.size:
        if W.min() < 0 or W.max() >= n:
            raise ConfigError("vertex out of range")
        mask[W.astype(np.int64)] = True
    return mask


@dataclass
class DominationReport:
    undominated_count: int
    subset_size: int
    n: int

    def is_dominating(self, eps) -> bool:
        return Fraction(self.undominated_count) <= Fraction(eps) * self.n if isinstance(eps, Fraction) else self.undominated_count <= eps * self.n

    def to_json(self) -> dict:
        return dict(self.__dict__)


def dominated_mask(graph: DirectedGraph, W) -> np.ndarray:
    mask = _as_mask(W, graph.n)
    hits = np.bincount(graph.src, weights=mask[graph.dst], minlength=graph.n)
    return hits > 0


def domination(graph: DirectedGraph, W) -> DominationReport:
    """``Y`` = number of vertices without an out-neighbour in ``W``."""
    mask = _as_mask(W, graph.n)
    dom = dominated_mask(graph, mask)
    return DominationReport(int(graph.n - dom.sum()), int(mask.sum()), graph.n)


def undominated_bruteforce(graph: DirectedGraph, W) -> int:
    """Independent count of ``Y`` from adjacency lists."""
    members = set(np.flatnonzero(_as_mask(W, graph.n)).tolist())
    return sum(1 for nbrs in graph.adjacency_lists() if not any(w in members for w in nbrs))


def _exact(kappa) -> Fraction:
    return kappa if isinstance(kappa, Fraction) else Fraction(str(kappa))


def hypothesis_check(k: int, M: int, kappa, N: int) -> bool:
    """``(1 - 1/sqrt k)^k < kappa`` and ``N > 2 M^2 kappa^-3``.

    Both sides are rational when ``k`` is a perfect square and are then
    compared exactly; otherwise the first inequality is evaluated in floating
    point (the left side is computed as ``exp(k log1p(-1/sqrt k))``).
    """
    if not (1 <= k <= M) or not 0 < float(kappa) < 1:
        raise ConfigError("need 1 <= k <= M and 0 < kappa < 1")
    kap = _exact(kappa)
    r = math.isqrt(k)
    if r * r == k:
        first = Fraction(r - 1, r) ** k < kap
    else:
        first = math.exp(k * math.log1p(-1 / math.sqrt(k))) < float(kap)
    second = N * kap**3 > 2 * M * M
    return bool(first and second)


@dataclass
class LemmaTrial:
    Y: int
    W_size: int
    dominating_3kappa: bool
    size_ok: bool

    @property
    def success(self) -> bool:
        return self.dominating_3kappa and self.size_ok


def _size_ok(size: int, n: int, k: int) -> bool:
    # |W| <= 2 n / sqrt(k)  <=>  |W|^2 k <= 4 n^2
    return size * size * k <= 4 * n * n


def lemma_trial(graph: DirectedGraph, k: int, kappa, seed: int | None = None, rng: np.random.Generator | None = None) -> LemmaTrial:
    """One draw of a ``1/sqrt(k)``-Bernoulli set and the two lemma events."""
    n = graph.n
    W = bernoulli_subset(n, 1 / math.sqrt(k), seed=seed, rng=rng)
    rep = domination(graph, W)
    kap = _exact(kappa)
    return LemmaTrial(rep.undominated_count, rep.subset_size, rep.undominated_count <= 3 * kap * n, _size_ok(rep.subset_size, n, k))


@dataclass
class LemmaMonteCarlo:
    family: str
    n: int
    k: int
    M: int
    kappa: float
    trials: int
    in_hypothesis: bool
    numeric_hypothesis: bool
    regularity: dict
    failure_rate: float
    mean_Y: float
    var_Y: float
    mean_W: float
    bound_E_Y: float
    bound_var_Y: float
    exact_E_Y: float
    checks: dict = field(default_factory=dict)
    per_trial: list = field(default_factory=list, repr=False)

    def to_json(self, with_trials: bool = False) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "per_trial"}
        if with_trials:
            out["per_trial"] = self.per_trial
        return out


def lemma_montecarlo(family: str | DirectedGraph, n: int, k: int, M: int, kappa: float, trials: int, seed: int,
                     threads: int = 1, override: bool = False) -> LemmaMonteCarlo:
    """Repeat ``lemma_trial`` on one graph drawn from ``family``.

    The graph uses substream ``(0,)`` of ``seed`` and trial ``i`` uses
    ``(1, i)``, so the report is identical for any ``threads``.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    graph = family if isinstance(family, DirectedGraph) else build_family(family, n, rng_for(seed, 0))
    n = graph.n
    numeric = hypothesis_check(k, M, kappa, n)
    reg = regularity(graph, k, M)
    in_hyp = numeric and reg.is_regular(kappa)
    if not in_hyp and not override:
        raise HypothesisViolated(
            f"parameters outside the lemma's hypotheses (inequalities={numeric}, regular={reg.is_regular(kappa)}); pass override to run anyway")

    def one(i):
        t = lemma_trial(graph, k, kappa, rng=rng_for(seed, 1, i))
        return (t.Y, t.W_size, t.dominating_3kappa, t.size_ok)

    rows = map_ordered(one, range(trials), threads)
    Y = np.array([r[0] for r in rows], dtype=float)
    Wsz = np.array([r[1] for r in rows], dtype=float)
    fail = np.array([not (r[2] and r[3]) for r in rows])
    p = 1 / math.sqrt(k)
    exact_EY = float(np.sum((1 - p) ** graph.out_degree()))
    var = float(Y.var(ddof=1)) if trials > 1 else 0.0
    rate = float(fail.mean())
    guard = float(kappa) + 3 * math.sqrt(float(kappa) * (1 - float(kappa)) / trials)
    checks = {
        "failure_rate_within_guard": rate <= guard,
        "mean_Y_below_2_kappa_n": float(Y.mean()) <= 2 * float(kappa) * n,
        "var_Y_below_M2_n": var <= M * M * n,
    }
    per_trial = [{"trial": i, "Y": int(r[0]), "W": int(r[1]), "success": bool(r[2] and r[3])} for i, r in enumerate(rows)]
    return LemmaMonteCarlo(
        family if isinstance(family, str) else "explicit", n, k, M, float(kappa), trials, in_hyp, numeric, reg.to_json(),
        rate, float(Y.mean()), var, float(Wsz.mean()), 2 * float(kappa) * n, float(M * M * n), exact_EY, checks, per_trial,
    )


def sample_dominating_set(graph: DirectedGraph, p: float, rng: np.random.Generator, repair: bool = True) -> np.ndarray:
    """A ``p``-Bernoulli set, optionally enlarged so every vertex with an out-edge is dominated.

    Repair adds, for each undominated vertex in index order, its smallest
    out-neighbour.
    """
    W = bernoulli_subset(graph.n, p, rng=rng)
    if repair:
        dom = dominated_mask(graph, W)
        out = graph.out_degree()
        first = np.full(graph.n, -1)
        # src is sorted, so the first occurrence is the smallest out-neighbour
        starts = np.searchsorted(graph.src, np.arange(graph.n))
        has = out > 0
        first[has] = graph.dst[starts[has]]
        W = W.copy()
        W[first[(~dom) & has]] = True
    return W
