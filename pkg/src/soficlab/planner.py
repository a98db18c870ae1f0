"""Parameter cascade for the entropy bound: given a target scale ``eta`` and a
measure, choose ``(eps, delta, M, F1, F2, |V|)`` so that every constraint holds
with positive slack, and evaluate the resulting separation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._rng import rng_for
from .errors import ConfigError, Infeasible
from .groups import Group, ball
from .metrics import alphabet_separation
from .shift import MeasureModel, PeriodicPoint, check_delta, is_dyadic_reciprocal
from .stabilizers import _periodic_domain, approx_stabilizer, exact_stabilizer, sample_names


def separation_bound(F1_size: int, F2_size: int, M: float, delta: float, depth: int) -> float:
    """``(4/sqrt|F2|) |F1| log 2 + (4/sqrt M) log sep_{delta/2}(chi)`` in nats per vertex."""
    if min(F1_size, F2_size, M) <= 0 or delta <= 0:
        raise ConfigError("parameters must be positive")
    return 4 / math.sqrt(F2_size) * F1_size * math.log(2) + 4 / math.sqrt(M) * math.log(alphabet_separation(depth, delta / 2))


def domination_tail(n: int) -> float:
    """``(1 - 1/sqrt n)^n``."""
    return math.exp(n * math.log1p(-1 / math.sqrt(n))) if n > 1 else 0.0


def checked_tail_sup(M: int, horizon: int = 1 << 16) -> float:
    """An upper bound on ``sup_{n > M} (1 - 1/sqrt n)^n``.

    The maximum is scanned on ``(M, M + horizon]`` and beyond that the bound
    ``(1 - 1/sqrt n)^n <= exp(-sqrt n)`` covers the tail, so no monotonicity
    is assumed.
    """
    ns = np.arange(M + 1, M + horizon + 1, dtype=float)
    vals = np.exp(ns * np.log1p(-1 / np.sqrt(ns)))
    return float(max(vals.max(), math.exp(-math.sqrt(M + horizon))))


@dataclass
class Constraint:
    name: str
    holds: bool
    slack: float
    detail: str
    certified: str = "exact"

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PlannerOutput:
    eta: float
    eps: float
    delta: float
    M: int
    F0_radius: int
    F1_radius: int
    F1_size: int
    F2_radius: int
    F2_size: int
    min_vertices: int
    depth: int
    constraints: list = field(default_factory=list)
    binding: str = ""

    @property
    def all_hold(self) -> bool:
        return all(c.holds and c.slack > 0 for c in self.constraints)

    def separation_bound(self) -> float:
        return separation_bound(self.F1_size, self.F2_size, self.M, self.delta, self.depth)

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "constraints"}
        out["min_vertices"] = str(self.min_vertices)
        out["min_vertices_float"] = float(self.min_vertices)
        out["constraints"] = [c.to_json() for c in self.constraints]
        out["separation_bound"] = self.separation_bound()
        out["all_hold"] = self.all_hold
        return out


def _ball_radius_exceeding(group: Group, size: float) -> int:
    """Smallest radius whose ball has more than ``size`` elements."""
    lo, hi = 0, 1
    while group.ball_size(hi) <= size:
        hi *= 2
        if hi > 1 << 62:
            raise Infeasible("no ball of the group is large enough", "F_size")
    while lo < hi:
        mid = (lo + hi) // 2
        if group.ball_size(mid) > size:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _upper(mass: float, n: int) -> float:
    """Estimate plus three standard errors, with the error floored at one count."""
    return mass + 3 * math.sqrt(max(mass, 1 / n) * (1 - mass) / n)


class _MeasureOracle:
    """Answers the two measure-dependent questions, exactly for atoms, by sampling otherwise."""

    def __init__(self, mu: MeasureModel, sample_size: int, seed: int | None, test_radius: int):
        self.mu = mu
        self.group = mu.group
        self.atoms = mu.atoms()
        self.samples = sample_size
        self.seed = seed
        self.test_radius = test_radius
        self.test = ball(self.group, test_radius)
        if self.atoms is None and seed is None:
            raise ConfigError("a seed is required for sampled certification")

    def approx_mismatch_mass(self, delta: float, F0) -> tuple[float, str]:
        """Mass of ``{x : stab_{delta,F0}(x) != stab(x)}``."""
        if self.atoms is not None:
            mass = 0.0
            for w, pt in self.atoms:
                # both sets are unions of cosets of the period lattice: compare one element per class
                dom = _periodic_domain(pt)
                a = approx_stabilizer(pt, delta, F0, dom).members
                e = exact_stabilizer(pt, dom).members
                mass += w * (a != e)
            return mass, "exact"
        group = self.group
        F0 = group.sorted(F0)
        others = [g for g in group.sorted(self.test) if g != group.identity]
        window = group.sorted({group.mul(group.inv(g), h) for g in others for h in F0} | set(F0))
        col = {h: j for j, h in enumerate(window)}
        names = sample_names(self.mu, window, self.samples, rng_for(self.seed, 7))
        from .shift import near_table

        near = near_table(self.mu.depth, delta)
        hit = np.zeros(self.samples, dtype=bool)
        for g in others:
            gi = group.inv(g)
            a = [col[h] for h in F0]
            b = [col[group.mul(gi, h)] for h in F0]
            hit |= near[names[:, a] ^ names[:, b]].all(axis=1)
        # a free point has trivial stabilizer, so any approximate member in the test window is a mismatch
        return _upper(float(hit.mean()), self.samples), f"sampled n={self.samples}, test radius {self.test_radius}"

    def small_stab_mass(self, M: int, F1_radius: int) -> tuple[float, str]:
        """Mass of ``{x : |stab(x) & F1| <= M}`` with ``F1`` the ball of radius ``F1_radius``."""
        F1 = ball(self.group, F1_radius)
        if self.atoms is not None:
            mass = 0.0
            for w, pt in self.atoms:
                mass += w * (len(exact_stabilizer(pt, F1)) <= M)
            return mass, "exact"
        group = self.group
        others = [g for g in group.sorted(self.test) if g != group.identity]
        window = group.sorted({group.mul(group.inv(g), h) for g in others for h in self.test} | set(self.test))
        col = {h: j for j, h in enumerate(window)}
        names = sample_names(self.mu, window, self.samples, rng_for(self.seed, 8))
        # stabilizer size observed inside the test window; larger windows can only shrink it
        size = np.ones(self.samples, dtype=np.int64)
        T = group.sorted(self.test)
        for g in others:
            if g not in F1:
                continue
            gi = group.inv(g)
            a = [col[h] for h in T]
            b = [col[group.mul(gi, h)] for h in T]
            size += (names[:, a] == names[:, b]).all(axis=1)
        # elements of F1 beyond the test window are counted as stabilizing, so this mass is a lower bound
        outside = len(F1 - self.test)
        mass = float(np.mean(size + outside <= M))
        return mass, f"sampled n={self.samples}; lower bound from a radius-{self.test_radius} test window"


def plan_parameters(eta: float, depth: int, mu: MeasureModel, sample_size: int = 10_000, seed: int | None = None,
                    test_radius: int = 3, max_F0_radius: int = 6, factor: float = 0.9) -> PlannerOutput:
    """Walk the cascade in order, taking each quantity a fixed ``factor`` inside its bound.

    The label-cost condition on ``F2`` is imposed with the constant 4, the one
    appearing in the separation bound, so that the final bound is below ``eta``.
    """
    if not 0 < eta <= 1:
        raise ConfigError("eta must lie in (0, 1]")
    if mu.depth != depth:
        raise ConfigError("measure depth differs from the requested depth")
    group = mu.group
    cons: list[Constraint] = []

    eps_cap = min(eta / 100, 1 / 3)
    eps = factor * eps_cap
    cons.append(Constraint("epsilon_range", 0 < eps < eps_cap, eps_cap - eps, f"0 < eps < min(eta/100, 1/3) = {eps_cap:g}"))
    binding = "eta/100" if eta / 100 < 1 / 3 else "1/3"

    margin = eta - 100 * eps
    delta = factor * margin / 3
    while is_dyadic_reciprocal(delta):
        delta *= 0.99
    check_delta(delta)
    cons.append(Constraint("delta_margin", 3 * delta < margin, margin - 3 * delta, "3 delta < eta - 100 eps"))

    oracle = _MeasureOracle(mu, sample_size, seed, test_radius)
    F0_radius = None
    for r in range(max_F0_radius + 1):
        mass, how = oracle.approx_mismatch_mass(delta, ball(group, r))
        if mass < eps / 2:
            F0_radius = r
            break
    if F0_radius is None:
        raise Infeasible("no F0 within the search radius certifies the stabilizer approximation", "delta_stabilizer_approx",
                         {"eps": eps, "delta": delta, "last_mass": mass})
    cons.append(Constraint("delta_stabilizer_approx", True, eps / 2 - mass,
                           f"mu(stab_(delta,F0) != stab) < eps/2 with F0 = ball({F0_radius})", how))

    sep_half = alphabet_separation(depth, delta / 2)
    # smallest M with (4/sqrt M) log sep < eta/2
    need = (8 * math.log(sep_half) / eta) ** 2 if sep_half > 1 else 0.0
    M = max(1, math.floor(need) + 1)
    while not 4 / math.sqrt(M) * math.log(sep_half) < eta / 2:
        M += 1
    while checked_tail_sup(M) >= eps / 3:
        M += 1
    tail = checked_tail_sup(M)
    cons.append(Constraint("M_domination", tail < eps / 3, eps / 3 - tail, "sup_{n>M} (1 - 1/sqrt n)^n < eps/3 (scanned)"))
    term = 4 / math.sqrt(M) * math.log(sep_half)
    cons.append(Constraint("M_alphabet", term < eta / 2, eta / 2 - term, f"(4/sqrt M) log sep_(delta/2) < eta/2, sep = {sep_half}"))

    F1_radius = max(F0_radius, _ball_radius_exceeding(group, M))
    mass1, how1 = oracle.small_stab_mass(M, F1_radius)
    if how1 != "exact" and mass1 < eps / 2:
        raise Infeasible("sampling cannot certify a lower bound on stabilizer sizes", "F1_stabilizer_mass",
                         {"eps": eps, "M": M, "F1_radius": F1_radius, "mass_lower_bound": mass1})
    if not mass1 < eps / 2:
        raise Infeasible(f"stabilizers are too small: mass {mass1:.4g} of points have at most M={M} stabilizing elements in F1",
                         "F1_stabilizer_mass", {"eps": eps, "delta": delta, "M": M, "F1_radius": F1_radius, "mass": mass1, "how": how1})
    F1_size = group.ball_size(F1_radius)
    cons.append(Constraint("F1_stabilizer_mass", True, eps / 2 - mass1, f"mu(|stab & F1| <= M) < eps/2 with F1 = ball({F1_radius})", how1))

    # (4/sqrt|F2|) |F1| log 2 < eta/2  <=>  |F2| > (8 |F1| log 2 / eta)^2
    F2_min = (8 * F1_size * math.log(2) / eta) ** 2
    F2_radius = max(F1_radius, _ball_radius_exceeding(group, F2_min))
    F2_size = group.ball_size(F2_radius)
    label2 = 2 / math.sqrt(F2_size) * F1_size * math.log(2)
    label4 = 2 * label2
    cons.append(Constraint("F2_label_cost", label2 < eta / 2, eta / 2 - label2, "(2/sqrt|F2|) |F1| log 2 < eta/2"))
    cons.append(Constraint("F2_label_cost_closing", label4 < eta / 2, eta / 2 - label4, "(4/sqrt|F2|) |F1| log 2 < eta/2"))

    # |V| > 2 |F2|^2 (eps/3)^-3, evaluated exactly
    bound_V = 2 * F2_size**2 / Fraction(eps / 3) ** 3
    min_V = math.floor(bound_V) + 1
    cons.append(Constraint("V_size", min_V > bound_V, float(min_V - bound_V), "|V| > 2 |F2|^2 (eps/3)^-3"))

    out = PlannerOutput(eta, eps, delta, M, F0_radius, F1_radius, F1_size, F2_radius, F2_size, min_V, depth, cons, binding)
    sb = out.separation_bound()
    cons.append(Constraint("closing_bound", sb < eta, eta - sb, "separation bound < eta"))
    return out
