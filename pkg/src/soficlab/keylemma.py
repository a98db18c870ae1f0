"""Selector (C, tau), stabilizer labels, the labelled graph G_s and the two claim checks.

Given good models of a measure with large approximate stabilizers, vertices
whose stabilizer is read off a small core ``C`` inherit an edge set along which
every good model is nearly constant. This module builds those objects for a
concrete sofic map and checks the edge and domination claims exhaustively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._rng import map_ordered, rng_for
from .errors import ConfigError, HypothesisViolated
from .graphs import DirectedGraph, domination, graph_from_sofic, hypothesis_check, regularity, sample_dominating_set
from .groups import Integers, interval, power_set
from .metrics import alphabet_separation, dV
from .shift import (
    Configuration,
    Neighborhood,
    PeriodicMixture,
    PeriodicPoint,
    Proposal,
    StabBlock,
    near_table,
    rejection_sample,
)
from .sofic import SoficMap, build_cyclic
from .stabilizers import GoodVertexReport, good_vertices, stab_membership_matrix


@dataclass
class Selector:
    """Core set ``C`` and choice function ``tau``; ``tau[v]`` indexes ``F2``."""

    F2: list
    C: np.ndarray
    tau: np.ndarray
    xi_tau: np.ndarray
    p: float
    in_hypothesis: bool
    D: np.ndarray | None = None

    @property
    def core_size(self) -> int:
        return int(self.C.sum())

    @property
    def cond_I(self) -> bool:
        # |C| < 2|V| / sqrt|F2|  <=>  |C|^2 |F2| < 4 |V|^2  (when |C| > 0)
        n = len(self.C)
        return self.core_size**2 * len(self.F2) < 4 * n * n

    @property
    def outside_fraction(self) -> float:
        """Fraction of ``v`` with ``xi_tau(v)`` outside ``C``."""
        return float((~self.C[self.xi_tau]).mean())

    def tau_element(self, v: int):
        return self.F2[self.tau[v]]

    def summary(self, kappa: float | None = None) -> dict:
        out = {"core_size": self.core_size, "p": self.p, "cond_I": self.cond_I,
               "outside_fraction": self.outside_fraction, "in_hypothesis": self.in_hypothesis}
        if kappa is not None:
            out["cond_II"] = self.outside_fraction <= 3 * kappa
        return out


def build_selector(xi: SoficMap, F2: Iterable, kappa: float, seed: int, p: float | None = None,
                   override: bool = False) -> Selector:
    """Draw ``C`` as a ``1/sqrt|F2|``-Bernoulli set and ``tau(v)`` uniform on
    ``N_v = {g in F2 : xi_g(v) in C}`` (uniform on ``F2`` when ``N_v`` is empty)."""
    group = xi.group
    F2 = group.sorted(F2)
    xi.require(F2)
    k = len(F2)
    graph = graph_from_sofic(xi, F2)
    in_hyp = hypothesis_check(k, k, kappa, xi.n) and regularity(graph, k, k).is_regular(kappa)
    if not in_hyp and not override:
        raise HypothesisViolated("sofic graph outside the dominating-set lemma's hypotheses")
    if p is None:
        p = 1 / math.sqrt(k)
    rng = rng_for(seed, 5)
    C = rng.random(xi.n) < p
    hits = np.stack([C[xi.perm(g)] for g in F2], axis=1)
    count = hits.sum(axis=1)
    u = rng.random(xi.n)
    tau = np.empty(xi.n, dtype=np.int64)
    has = count > 0
    # rank of the chosen hit among the True entries of each row
    rank = np.floor(u * np.where(has, count, k)).astype(np.int64)
    cum = np.cumsum(hits, axis=1)
    tau[has] = np.argmax(cum[has] > rank[has, None], axis=1)
    tau[~has] = rank[~has]
    perms = np.stack([xi.perm(g) for g in F2])
    xi_tau = perms[tau, np.arange(xi.n)]
    return Selector(F2, C, tau, xi_tau, float(p), bool(in_hyp))


@dataclass
class StabLabel:
    """``member[v, i]``: ``F1[i]`` lies in ``stab_{delta,F1}(Pi_v x)``, kept for ``v`` in ``C``."""

    F1: list
    C: np.ndarray
    member: np.ndarray

    def key(self) -> bytes:
        return self.member[self.C].tobytes()

    def at(self, v: int) -> frozenset:
        return frozenset(g for g, b in zip(self.F1, self.member[v]) if b)

    def with_label(self, v: int, members: Iterable) -> "StabLabel":
        members = set(members)
        new = self.member.copy()
        new[v] = [g in members for g in self.F1]
        return StabLabel(self.F1, self.C, new)

    def __eq__(self, other):
        return isinstance(other, StabLabel) and self.F1 == other.F1 and np.array_equal(self.C, other.C) and self.key() == other.key()


def stab_label(x: Configuration, xi: SoficMap, C: np.ndarray, delta: float, F1: Iterable) -> StabLabel:
    F1s, member = stab_membership_matrix(x, xi, delta, F1)
    member = member & C[:, None]
    return StabLabel(F1s, C.copy(), member)


def build_gs(xi: SoficMap, selector: Selector, s: StabLabel) -> DirectedGraph:
    """Edges ``(v, xi_g(v))`` for ``g`` in ``tau(v)^-1 s_{xi_tau(v)} tau(v)`` when ``xi_tau(v)`` is in ``C``."""
    group = xi.group
    inv, mul = group.inv, group.mul
    target_in_C = selector.C[selector.xi_tau]
    src, dst = [], []
    for ti, t in enumerate(selector.F2):
        rows = np.flatnonzero((selector.tau == ti) & target_in_C)
        if not len(rows):
            continue
        lab = s.member[selector.xi_tau[rows]]
        for fi, f in enumerate(s.F1):
            sel = rows[lab[:, fi]]
            if len(sel):
                g = mul(inv(t), mul(f, t))
                src.append(sel)
                dst.append(xi.perm(g)[sel])
    if not src:
        return DirectedGraph(xi.n, [], [])
    return DirectedGraph(xi.n, np.concatenate(src), np.concatenate(dst))


def gs_window(F1: Iterable, F2: Iterable, group) -> frozenset:
    """Group elements ``t^-1 f t`` that ``build_gs`` may need."""
    from .groups import inverse_set, product_set

    return product_set(product_set(inverse_set(F2, group), F1, group), F2, group)


def claimA_check(x: Configuration, gs: DirectedGraph, good: GoodVertexReport, selector: Selector, delta: float) -> list[tuple[int, int]]:
    """Edges ``(v, w)`` with ``v`` and ``xi_tau(v)`` good for ``x`` but ``d(x_v, x_w) >= delta``."""
    ok = good.good
    qual = ok[gs.src] & ok[selector.xi_tau[gs.src]]
    near = near_table(x.depth, delta)
    bad = qual & ~near[x.symbols[gs.src] ^ x.symbols[gs.dst]]
    return list(zip(gs.src[bad].tolist(), gs.dst[bad].tolist()))


@dataclass
class ClaimD:
    hypothesis: bool
    conclusion: bool
    in_hypothesis: bool
    distance: float

    @property
    def holds(self) -> bool:
        return (not self.hypothesis) or self.conclusion

    def to_json(self) -> dict:
        return {**self.__dict__, "holds": self.holds}


def claimD_check(x: Configuration, y: Configuration, D: np.ndarray, delta: float, eta: float,
                 in_hypothesis: bool = True) -> ClaimD:
    """If ``x`` and ``y`` are delta-close on every vertex of ``D`` then ``d^V(x, y) < eta``."""
    idx = np.flatnonzero(D) if D.dtype == bool else np.asarray(D, dtype=np.int64)
    near = near_table(x.depth, delta)
    hyp = bool(near[x.symbols[idx] ^ y.symbols[idx]].all())
    dist = dV(x, y)
    return ClaimD(hyp, dist < eta, bool(in_hypothesis), dist)


# --- the full pipeline ----------------------------------------------------------

@dataclass
class StabExperimentConfig:
    """Planted period-2 models on a cyclic map, tested against a stabilizer-constrained neighborhood."""

    n: int = 4096
    depth: int = 3
    pattern: tuple = (0, 4)
    noise: float = 0.01
    noise_from: int = 2
    delta: float = 0.3
    M: int = 3
    eps: float = 0.0009
    eta: float = 1.0
    F1_radius: int = 2
    F2_radius: int = 2
    tv_window: tuple = (0, 1)
    tv_radius: float = 0.1
    models: int = 4
    max_tries: int = 400
    corrupt: bool = True

    def validate(self):
        if not 3 * self.delta < self.eta - 100 * self.eps:
            raise ConfigError("need 3*delta < eta - 100*eps")
        if self.F1_radius > self.F2_radius:
            raise ConfigError("F1 must lie inside F2")
        if self.n % len(self.pattern):
            raise ConfigError("pattern period must divide n")


def run_stab_experiment(cfg: StabExperimentConfig, seed: int, threads: int = 1) -> dict:
    cfg.validate()
    from .planner import separation_bound

    group = Integers()
    F1 = interval(-cfg.F1_radius, cfg.F1_radius)
    F2 = interval(-cfg.F2_radius, cfg.F2_radius)
    block = StabBlock(cfg.M, cfg.delta, cfg.eps, F1, F2)
    O = Neighborhood(frozenset(cfg.tv_window), PeriodicMixture.orbit(PeriodicPoint(group, list(cfg.pattern), cfg.depth)),
                     cfg.tv_radius, block)
    need = power_set(F2, 6, group) | frozenset(O.full_window())
    xi = build_cyclic(cfg.n, need | {-h for h in need})
    proposal = Proposal("planted", cfg.noise, cfg.noise_from)
    models, tries = rejection_sample(O.reference, xi, O, cfg.models, cfg.max_tries, seed, proposal, threads)
    report: dict = {"sofic": xi.to_json(), "neighborhood": O.to_json(),
                    "good_models": {"found": len(models), "tries": tries}}
    if len(models) < 2:
        report["status"] = "too few good models"
        return report

    goods = map_ordered(lambda x: good_vertices(x, xi, cfg.delta, cfg.M, F1, F2), models, threads)
    kappa = cfg.eps / 3
    sel = build_selector(xi, F2, kappa, seed, override=True)
    report["selector"] = sel.summary(kappa)
    bad_tau = [float((~g.good[sel.xi_tau]).mean()) for g in goods]
    omega_prime = [b < 8 * cfg.eps for b in bad_tau]
    report["good_vertices"] = [g.summary() for g in goods]
    report["cond_III_fraction"] = float(np.mean(omega_prime))

    labels = [stab_label(x, xi, sel.C, cfg.delta, F1) for x in models]
    s = labels[0]
    klass = [i for i, lab in enumerate(labels) if lab.key() == s.key()]
    gs = build_gs(xi, sel, s)
    reg = regularity(gs, cfg.M, len(F2) ** 3)
    report["label_class_size"] = len(klass)
    report["gs"] = {"edges": gs.edge_count, "regularity": reg.to_json(), "regular_11eps": reg.is_regular(11 * cfg.eps)}

    violations_A = {i: claimA_check(models[i], gs, goods[i], sel, cfg.delta) for i in klass}
    report["claimA_violations"] = sum(len(v) for v in violations_A.values())

    D = sample_dominating_set(gs, 1 / math.sqrt(cfg.M), rng_for(seed, 6), repair=True)
    sel.D = D
    dom = domination(gs, D)
    n = cfg.n
    D_ok = dom.undominated_count <= 33 * cfg.eps * n and D.sum() ** 2 * cfg.M <= 4 * n * n
    report["D"] = {"size": int(D.sum()), "undominated": dom.undominated_count, "in_hypothesis": bool(D_ok)}
    pairs = []
    for i in klass:
        for j in klass:
            if i <= j:
                inh = D_ok and omega_prime[i] and omega_prime[j]
                pairs.append(claimD_check(models[i], models[j], D, cfg.delta, cfg.eta, inh))
    report["claimD"] = {
        "pairs": len(pairs),
        "hypothesis_true": sum(p.hypothesis for p in pairs),
        "in_hypothesis_violations": sum(1 for p in pairs if p.in_hypothesis and not p.holds),
        "out_of_hypothesis_violations": sum(1 for p in pairs if not p.in_hypothesis and not p.holds),
    }

    if cfg.corrupt:
        c = int(sel.xi_tau[np.flatnonzero(sel.C[sel.xi_tau])[0]])
        bad_s = s.with_label(c, F1)
        gs_bad = build_gs(xi, sel, bad_s)
        report["corrupted_label"] = {"vertex": c, "claimA_violations": len(claimA_check(models[klass[0]], gs_bad, goods[klass[0]], sel, cfg.delta))}

    report["separation_bound"] = separation_bound(len(F1), len(F2), cfg.M, cfg.delta, cfg.depth)
    report["sep_alphabet_half_delta"] = alphabet_separation(cfg.depth, cfg.delta / 2)
    report["status"] = "ok"
    return report
