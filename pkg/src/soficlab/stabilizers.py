"""Exact and approximate stabilizers, the two-mass neighborhood constraints,
good vertices, and the conjugation check.

Throughout, ``g(x)_h = x_{g^-1 h}`` and

    stab_{delta,F}(x) = {g : d(x_h, x_{g^-1 h}) < delta for every h in F}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._rng import rng_for
from .errors import ConfigError, InsufficientWindow
from .groups import FiniteGroup, Group, Integers, Lattice, inverse_set, power_set, product_set
from .shift import (
    EmpiricalDistribution,
    MeasureModel,
    PeriodicPoint,
    ProductMeasure,
    StabBlock,
    WindowedPoint,
    names_matrix,
    near_table,
    symbol_distance,
)
from .sofic import SoficMap, identity_perm


@dataclass(frozen=True)
class StabilizerWindowSet:
    """Members of a (possibly approximate) stabilizer inside a query window."""

    base_window: frozenset
    query: frozenset
    members: frozenset
    delta: float | None = None

    def __contains__(self, g):
        return g in self.members

    def __len__(self):
        return len(self.members)

    def to_json(self, group: Group) -> dict:
        return {"members": [group.format(g) for g in group.sorted(self.members)], "delta": self.delta,
                "query_size": len(self.query)}


def _periodic_domain(p: PeriodicPoint) -> list:
    """One representative per residue class of the period lattice (the whole group when finite)."""
    if p.pattern.ndim == 0:
        return [p.group.identity]
    if isinstance(p.group, Integers):
        return list(range(p.pattern.shape[0]))
    if isinstance(p.group, Lattice):
        return [tuple(int(c) for c in idx) for idx in np.ndindex(*p.pattern.shape)]
    return list(range(p.group.order))


def _approx_members(p, delta: float, F: list, F_eval: Iterable) -> frozenset:
    group = p.group
    m = p.depth
    inv, mul = group.inv, group.mul
    out = set()
    cache: dict = {}
    for g in F_eval:
        key = p.residue(g) if isinstance(p, PeriodicPoint) else g
        hit = cache.get(key)
        if hit is None:
            gi = inv(g)
            hit = all(symbol_distance(p[h], p[mul(gi, h)], m) < delta for h in F)
            cache[key] = hit
        if hit:
            out.add(g)
    return frozenset(out)


def approx_stabilizer(p, delta: float, F: Iterable, F_eval: Iterable) -> StabilizerWindowSet:
    """``stab_{delta,F}(p)`` intersected with ``F_eval``; reads ``p`` on ``F_eval^-1 F``."""
    if delta <= 0:
        raise ConfigError("delta must be positive")
    group = p.group
    F = frozenset(F)
    F_eval = frozenset(F_eval)
    if isinstance(p, WindowedPoint):
        p.require(product_set(inverse_set(F_eval, group), F, group) | F)
        reads = list(F)
    else:
        reads = p.reduce(F)
    return StabilizerWindowSet(F, F_eval, _approx_members(p, delta, reads, F_eval), delta)


def exact_stabilizer(p, F: Iterable, compare: Iterable | None = None) -> StabilizerWindowSet:
    """``{g in F : g(p) = p}`` tested on ``compare``.

    Periodic points are compared over a full fundamental domain, which makes
    the answer exact. For windowed points ``compare`` defaults to the largest
    window on which every shift in ``F`` can be evaluated.
    """
    group = p.group
    F = frozenset(F)
    inv, mul = group.inv, group.mul
    if isinstance(p, PeriodicPoint):
        dom = _periodic_domain(p)
        members = frozenset(g for g in F if all(p[h] == p[mul(inv(g), h)] for h in dom))
        return StabilizerWindowSet(frozenset(dom), F, members)
    W = p.window
    if compare is None:
        compare = frozenset(h for h in W if all(mul(inv(g), h) in W for g in F))
        if not compare:
            raise InsufficientWindow("no coordinate can be compared under every shift in F")
    else:
        compare = frozenset(compare)
        p.require(product_set(inverse_set(F, group), compare, group) | compare)
    members = frozenset(g for g in F if all(p[h] == p[mul(inv(g), h)] for h in compare))
    return StabilizerWindowSet(compare, F, members)


# --- vectorized evaluation over many names ----------------------------------

class StabKernel:
    """Evaluates both stabilizer conditions for many names at once.

    ``names[i, j]`` is the value of name ``i`` at ``window[j]``; the window must
    contain ``StabBlock.read_window``.
    """

    def __init__(self, group: Group, window, depth: int, block: StabBlock):
        self.group = group
        self.block = block
        self.depth = depth
        self.col = {h: j for j, h in enumerate(window)}
        need = block.read_window(group)
        missing = [h for h in need if h not in self.col]
        if missing:
            raise InsufficientWindow(f"{len(missing)} read offsets missing from the name window")
        self.F1 = group.sorted(block.F1)
        self.F2sq = group.sorted(product_set(block.F2, block.F2, group))
        self.near = near_table(depth, block.delta)
        inv, mul = group.inv, group.mul
        # column pairs (h, g^-1 h) to compare for each g in F1
        self._pairs1 = []
        self._pairs2 = []
        for g in self.F1:
            gi = inv(g)
            self._pairs1.append((np.array([self.col[h] for h in self.F1]), np.array([self.col[mul(gi, h)] for h in self.F1])))
            self._pairs2.append((np.array([self.col[h] for h in self.F2sq]), np.array([self.col[mul(gi, h)] for h in self.F2sq])))

    def membership(self, names: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Boolean ``(k, |F1|)`` arrays: ``g in stab_{delta,F1}`` and ``g in stab_{delta,F2^2}``."""
        k = names.shape[0]
        in1 = np.empty((k, len(self.F1)), dtype=bool)
        in2 = np.empty((k, len(self.F1)), dtype=bool)
        for i, ((a1, b1), (a2, b2)) in enumerate(zip(self._pairs1, self._pairs2)):
            in1[:, i] = self.near[names[:, a1] ^ names[:, b1]].all(axis=1)
            in2[:, i] = self.near[names[:, a2] ^ names[:, b2]].all(axis=1)
        return in1, in2

    def bad_masks(self, names: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-name indicators of the small-stabilizer event and the unstable-stabilizer event."""
        in1, in2 = self.membership(names)
        small = in1.sum(axis=1) < self.block.M
        unstable = (in1 != in2).any(axis=1)
        return small, unstable


@dataclass
class ConstraintMasses:
    small_stab_mass: float
    unstable_stab_mass: float
    member: bool
    exact: bool
    stderr: tuple | None = None
    samples: int | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _point_flags(p, block: StabBlock) -> tuple[bool, bool]:
    group = p.group
    s1 = approx_stabilizer(p, block.delta, block.F1, block.F1).members
    s2 = approx_stabilizer(p, block.delta, product_set(block.F2, block.F2, group), block.F1).members
    return len(s1) < block.M, s1 != s2


def sample_names(measure: MeasureModel, window: list, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent samples of ``measure`` read on ``window`` (one row each)."""
    if isinstance(measure, ProductMeasure):
        site = measure.site_marginal()
        return rng.choice(len(site), size=(count, len(window)), p=site)
    rows = []
    for _ in range(count):
        pt = measure.sample_point(rng, window)
        rows.append([pt[h] for h in window])
    return np.array(rows, dtype=np.int64).reshape(count, len(window))


def neighborhood_constraints(nu, block: StabBlock, samples: int = 10_000, seed: int | None = None) -> ConstraintMasses:
    """Masses of the small-stabilizer and unstable-stabilizer events under ``nu``.

    Exact for empirical distributions and atomic measures; otherwise estimated
    from ``samples`` draws with the standard error reported.
    """
    if isinstance(nu, EmpiricalDistribution):
        group = nu.group
        kern = StabKernel(group, nu.window, nu.depth, block)
        pats = np.array(list(nu.counts), dtype=np.int64).reshape(len(nu.counts), len(nu.window))
        w = np.array(list(nu.counts.values()), dtype=float) / nu.total
        small, unstable = kern.bad_masks(pats)
        a, b = float(w[small].sum()), float(w[unstable].sum())
        return ConstraintMasses(a, b, a < block.eps and b < block.eps, True)
    atoms = nu.atoms()
    if atoms is not None:
        a = b = 0.0
        for wt, pt in atoms:
            s, u = _point_flags(pt, block)
            a += wt * s
            b += wt * u
        return ConstraintMasses(a, b, a < block.eps and b < block.eps, True)
    if seed is None:
        raise ConfigError("a seed is required to estimate masses by sampling")
    group = nu.group
    window = group.sorted(block.read_window(group))
    names = sample_names(nu, window, samples, rng_for(seed, 4))
    small, unstable = StabKernel(group, window, nu.depth, block).bad_masks(names)
    a, b = float(small.mean()), float(unstable.mean())
    se = (float(np.sqrt(a * (1 - a) / samples)), float(np.sqrt(b * (1 - b) / samples)))
    return ConstraintMasses(a, b, a < block.eps and b < block.eps, False, se, samples)


# --- good vertices ---------------------------------------------------------------

@dataclass
class GoodVertexReport:
    """Per-vertex outcome of the three goodness conditions."""

    large_stab: np.ndarray
    stable_stab: np.ndarray
    triple_products: np.ndarray
    triple_checked: bool = True

    @property
    def good(self) -> np.ndarray:
        return self.large_stab & self.stable_stab & self.triple_products

    @property
    def flags(self) -> np.ndarray:
        """1 for a bad vertex, 0 for a good one."""
        return (~self.good).astype(np.int8)

    def reasons(self, v: int) -> list[str]:
        out = []
        if not self.large_stab[v]:
            out.append("small_stabilizer")
        if not self.stable_stab[v]:
            out.append("unstable_stabilizer")
        if not self.triple_products[v]:
            out.append("triple_product")
        return out

    def summary(self) -> dict:
        n = len(self.large_stab)
        return {
            "bad_fraction": float(1 - self.good.mean()),
            "small_stabilizer": int(n - self.large_stab.sum()),
            "unstable_stabilizer": int(n - self.stable_stab.sum()),
            "triple_product": int(n - self.triple_products.sum()),
            "triple_checked": self.triple_checked,
        }


def triple_product_flags(xi: SoficMap, F2: Iterable, power: int = 4) -> np.ndarray:
    """``xi_a xi_b xi_c (v) = xi_abc (v)`` for all ``a, b, c`` in ``F2^power``."""
    group = xi.group
    T = group.sorted(power_set(F2, power, group))
    xi.require(T, "window F2^4")
    xi.require(power_set(F2, 3 * power, group), "window F2^12 of triple products")
    ok = np.ones(xi.n, dtype=bool)
    mul = group.mul
    for b in T:
        pb = xi.perm(b)
        for c in T:
            pbc = pb[xi.perm(c)]
            bc = mul(b, c)
            for a in T:
                ok &= xi.perm(a)[pbc] == xi.perm(mul(a, bc))
    return ok


def good_vertices(x, xi: SoficMap, delta: float, M: int, F1: Iterable, F2: Iterable) -> GoodVertexReport:
    """Evaluate the three goodness conditions at every vertex.

    For maps known to be exact homomorphisms the triple-product condition holds
    identically and is not enumerated.
    """
    group = xi.group
    block = StabBlock(M, delta, 1.0, frozenset(F1), frozenset(F2))
    window = group.sorted(block.read_window(group))
    names = names_matrix(x, xi, window)
    in1, in2 = StabKernel(group, window, x.depth, block).membership(names)
    large = in1.sum(axis=1) >= M
    stable = ~(in1 != in2).any(axis=1)
    if xi.exact_hom:
        triple = np.ones(xi.n, dtype=bool)
        checked = False
    else:
        triple = triple_product_flags(xi, block.F2)
        checked = True
    return GoodVertexReport(large, stable, triple, checked)


def stab_membership_matrix(x, xi: SoficMap, delta: float, F1: Iterable) -> tuple[list, np.ndarray]:
    """``(F1 sorted, member)`` with ``member[v, i]`` true iff ``F1[i]`` lies in ``stab_{delta,F1}(Pi_v x)``."""
    group = xi.group
    F1 = frozenset(F1)
    block = StabBlock(max(1, len(F1)), delta, 1.0, F1, frozenset([group.identity]))
    window = group.sorted(block.read_window(group))
    kern = StabKernel(group, window, x.depth, block)
    in1, _ = kern.membership(names_matrix(x, xi, window))
    return kern.F1, in1


# --- conjugation ---------------------------------------------------------------------

@dataclass
class ConjugationResult:
    premise: bool
    conclusion: bool

    @property
    def holds(self) -> bool:
        return (not self.premise) or self.conclusion


def conjugation_window(F1: Iterable, F2: Iterable, group: Group) -> frozenset:
    """Every coordinate read by ``conjugation_check``."""
    F1, F2 = frozenset(F1), frozenset(F2)
    F2sq = product_set(F2, F2, group)
    F1i = inverse_set(F1, group)
    F2i = inverse_set(F2, group)
    F2iF1 = product_set(F2i, F1, group)
    return F1 | F2sq | product_set(F1i, F1, group) | product_set(F1i, F2sq, group) | F2iF1 | product_set(F1i, F2iF1, group)


def conjugation_check(p, delta: float, F1: Iterable, F2: Iterable) -> ConjugationResult:
    """Test: if the F1 and F2^2 approximate stabilizers agree on F1, then each
    ``g`` in F2 conjugates ``stab_{delta,F1}(p) & F1`` into ``stab_{delta,F1}(g(p))``."""
    group = p.group
    F1, F2 = frozenset(F1), frozenset(F2)
    if not F1 <= F2 or inverse_set(F2, group) != F2:
        raise ConfigError("need F1 contained in a symmetric F2")
    p.require(conjugation_window(F1, F2, group))
    S = approx_stabilizer(p, delta, F1, F1).members
    S2 = approx_stabilizer(p, delta, product_set(F2, F2, group), F1).members
    premise = S == S2
    inv, mul = group.inv, group.mul
    m = p.depth
    conclusion = True
    for g in F2:
        gi = inv(g)
        for f in S:
            fi = inv(f)
            # (g f g^-1) acting on g(p) at h reads p at f^-1 g^-1 h
            if not all(symbol_distance(p[mul(gi, h)], p[mul(fi, mul(gi, h))], m) < delta for h in F1):
                conclusion = False
                break
        if not conclusion:
            break
    return ConjugationResult(premise, conclusion)
