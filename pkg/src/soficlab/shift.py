"""Shift model over a depth-m truncated alphabet.

A symbol is an m-bit integer whose most significant bit is coordinate 0, so
the ultrametric ``d(a, b) = 2**-j`` (j the first differing coordinate) is a
function of ``a ^ b`` alone and can be tabulated.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._rng import map_ordered, rng_for
from .errors import ConfigError, ExhaustedTries, InsufficientWindow
from .groups import FiniteGroup, Group, Integers, Lattice, inverse_set, product_set
from .sofic import SoficMap


# --- symbols and metric -----------------------------------------------------

def distance_table(m: int) -> np.ndarray:
    """``table[a ^ b]`` is the distance between symbols ``a`` and ``b``."""
    x = np.arange(2**m)
    bl = np.zeros(2**m, dtype=np.int64)
    bl[1:] = np.floor(np.log2(x[1:])).astype(np.int64) + 1
    out = np.ldexp(1.0, (bl - m).astype(np.int64))
    out[0] = 0.0
    return out


def symbol_distance(a: int, b: int, m: int) -> float:
    x = int(a) ^ int(b)
    return 0.0 if x == 0 else 2.0 ** (x.bit_length() - m)


def near_table(m: int, delta: float) -> np.ndarray:
    """Boolean ``table[a ^ b]``: ``d(a, b) < delta``."""
    return distance_table(m) < delta


def is_dyadic_reciprocal(delta: float) -> bool:
    """True when ``1/delta`` is an integer power of two."""
    if delta <= 0:
        return False
    mant, _ = math.frexp(delta)
    return mant == 0.5


def check_delta(delta: float):
    if not delta > 0:
        raise ConfigError("delta must be positive")
    if is_dyadic_reciprocal(delta):
        raise ConfigError(f"1/delta must not be an integer power of 2 (delta={delta})")


def bits_to_symbol(bits: str) -> int:
    return int(bits, 2)


def symbol_to_bits(s: int, m: int) -> str:
    return format(int(s), f"0{m}b")


@dataclass(frozen=True, eq=False)
class Configuration:
    """A point of ``chi^V``: one m-bit symbol per vertex."""

    symbols: np.ndarray
    depth: int

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int64)
        if s.ndim != 1:
            raise ConfigError("configuration must be one-dimensional")
        if len(s) and (s.min() < 0 or s.max() >= 2**self.depth):
            raise ConfigError("symbol out of range for depth")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Configuration) and self.depth == other.depth and np.array_equal(self.symbols, other.symbols)

    def __hash__(self):
        return hash((self.depth, self.symbols.tobytes()))

    @classmethod
    def from_bits(cls, rows: Sequence[str]) -> "Configuration":
        rows = [r.strip() for r in rows if r.strip()]
        if not rows:
            raise ConfigError("empty configuration")
        m = len(rows[0])
        if any(len(r) != m or set(r) - {"0", "1"} for r in rows):
            raise ConfigError("rows must be bit strings of equal length")
        return cls(np.array([int(r, 2) for r in rows], dtype=np.int64), m)

    @classmethod
    def from_string(cls, s: str) -> "Configuration":
        """Depth-1 shorthand: ``"0101"`` is four vertices."""
        return cls(np.array([int(c) for c in s], dtype=np.int64), 1)

    def to_text(self) -> str:
        return "\n".join(symbol_to_bits(s, self.depth) for s in self.symbols) + "\n"


def read_configurations(text: str) -> list[Configuration]:
    """Parse blank-line separated blocks of m-bit rows."""
    blocks, cur = [], []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            cur.append(line)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    return [Configuration.from_bits(b) for b in blocks]


# --- points of chi^G ---------------------------------------------------------

class WindowedPoint:
    """Values of a point of ``chi^G`` on a finite window."""

    def __init__(self, group: Group, values: dict, depth: int):
        self.group = group
        self.values = dict(values)
        self.depth = depth

    @property
    def window(self) -> frozenset:
        return frozenset(self.values)

    def covers(self, F: Iterable) -> bool:
        return all(h in self.values for h in F)

    def require(self, F: Iterable):
        missing = [h for h in F if h not in self.values]
        if missing:
            raise InsufficientWindow(f"{len(missing)} coordinates missing, e.g. {self.group.format(missing[0])!r}")

    def __getitem__(self, h):
        try:
            return self.values[h]
        except KeyError:
            raise InsufficientWindow(f"coordinate {self.group.format(h)!r} not in window") from None

    def translate(self, g) -> "WindowedPoint":
        """The shifted point ``g(x)``, ``g(x)_h = x_{g^-1 h}``."""
        mul = self.group.mul
        return WindowedPoint(self.group, {mul(g, w): s for w, s in self.values.items()}, self.depth)

    def restrict(self, F: Iterable) -> "WindowedPoint":
        F = list(F)
        self.require(F)
        return WindowedPoint(self.group, {h: self.values[h] for h in F}, self.depth)

    def __eq__(self, other):
        return isinstance(other, WindowedPoint) and self.values == other.values and self.depth == other.depth

    def __repr__(self):
        items = ", ".join(f"{self.group.format(h)}:{symbol_to_bits(s, self.depth)}" for h, s in sorted(self.values.items(), key=lambda t: self.group.sort_key(t[0])))
        return f"WindowedPoint({{{items}}})"


class PeriodicPoint:
    """A total point of ``chi^G`` that factors through a finite quotient.

    ``pattern`` has shape ``(p,)`` on Z (period p), shape ``(p1, ..., pd)`` on
    Z^d, shape ``(|G|,)`` on a finite group, or shape ``()`` for a constant
    point on any group.
    """

    window = None

    def __init__(self, group: Group, pattern, depth: int):
        self.group = group
        self.pattern = np.array(pattern, dtype=np.int64)
        self.pattern.setflags(write=False)
        self.depth = depth
        if self.pattern.ndim:
            if isinstance(group, Integers) and self.pattern.ndim == 1:
                pass
            elif isinstance(group, Lattice) and self.pattern.ndim == group.d:
                pass
            elif isinstance(group, FiniteGroup) and self.pattern.shape == (group.order,):
                pass
            else:
                raise ConfigError(f"periodic pattern of shape {self.pattern.shape} unsupported on {group!r}")
        if self.pattern.size and (self.pattern.min() < 0 or self.pattern.max() >= 2**depth):
            raise ConfigError("symbol out of range for depth")

    @property
    def is_constant(self) -> bool:
        return self.pattern.ndim == 0 or bool(np.all(self.pattern == self.pattern.flat[0]))

    def covers(self, F) -> bool:
        return True

    def require(self, F):
        return None

    def residue(self, h):
        if self.pattern.ndim == 0:
            return ()
        if isinstance(self.group, Integers):
            return h % self.pattern.shape[0]
        if isinstance(self.group, Lattice):
            return tuple(c % p for c, p in zip(h, self.pattern.shape))
        return h

    def __getitem__(self, h):
        return int(self.pattern[self.residue(h)])

    def reduce(self, F: Iterable) -> list:
        """One representative of ``F`` per residue class; enough for any threshold test over ``F``."""
        seen = {}
        for h in self.group.sorted(F):
            seen.setdefault(self.residue(h), h)
        return list(seen.values())

    def translate(self, g) -> "PeriodicPoint":
        if self.pattern.ndim == 0:
            return self
        if isinstance(self.group, Integers):
            return PeriodicPoint(self.group, np.roll(self.pattern, g), self.depth)
        if isinstance(self.group, Lattice):
            return PeriodicPoint(self.group, np.roll(self.pattern, g, axis=tuple(range(self.group.d))), self.depth)
        gi = self.group.inv(g)
        return PeriodicPoint(self.group, [self.pattern[self.group.mul(gi, h)] for h in range(self.group.order)], self.depth)

    def restrict(self, F: Iterable) -> WindowedPoint:
        return WindowedPoint(self.group, {h: self[h] for h in F}, self.depth)

    def to_spec(self):
        return {"pattern": self.pattern.tolist(), "depth": self.depth}

    def __repr__(self):
        return f"PeriodicPoint({self.pattern.tolist()}, depth={self.depth})"


def constant_point(group: Group, symbol: int, depth: int) -> PeriodicPoint:
    return PeriodicPoint(group, symbol, depth)


# --- measures -----------------------------------------------------------------

class MeasureModel(ABC):
    group: Group
    depth: int

    @abstractmethod
    def site_marginal(self) -> np.ndarray:
        """Probability vector over the ``2**depth`` symbols at a single site."""

    @abstractmethod
    def pattern_prob(self, window: Sequence, pattern: tuple) -> float:
        """Exact probability of ``x_h = pattern[i]`` for ``h = window[i]``."""

    def atoms(self):
        """``[(weight, PeriodicPoint)]`` for purely atomic measures, else None."""
        return None

    @abstractmethod
    def sample_point(self, rng: np.random.Generator, window: Iterable):
        """A random point whose values are available at least on ``window``."""

    def sample_configuration(self, rng: np.random.Generator, n: int) -> Configuration:
        p = self.site_marginal()
        return Configuration(rng.choice(len(p), size=n, p=p), self.depth)

    @abstractmethod
    def to_spec(self) -> dict: ...


class ProductMeasure(MeasureModel):
    """i.i.d. sites; bit j of each symbol is 1 with probability ``p[j]``, independently."""

    def __init__(self, group: Group, depth: int, p=0.5):
        self.group = group
        self.depth = depth
        p = [float(p)] * depth if np.isscalar(p) else [float(q) for q in p]
        if len(p) != depth or any(not 0 <= q <= 1 for q in p):
            raise ConfigError("need one bit probability in [0, 1] per coordinate")
        self.p = tuple(p)
        probs = np.ones(2**depth)
        for s in range(2**depth):
            for j in range(depth):
                bit = (s >> (depth - 1 - j)) & 1
                probs[s] *= self.p[j] if bit else 1 - self.p[j]
        self._site = probs

    def site_marginal(self):
        return self._site.copy()

    def pattern_prob(self, window, pattern):
        return float(np.prod(self._site[list(pattern)]))

    def atoms(self):
        if np.count_nonzero(self._site) == 1:
            return [(1.0, PeriodicPoint(self.group, int(np.argmax(self._site)), self.depth))]
        return None

    def sample_point(self, rng, window):
        window = self.group.sorted(window)
        vals = rng.choice(len(self._site), size=len(window), p=self._site)
        return WindowedPoint(self.group, dict(zip(window, vals.tolist())), self.depth)

    def to_spec(self):
        return {"kind": "product", "depth": self.depth, "p": list(self.p)}


class PeriodicMixture(MeasureModel):
    """Finite convex combination of point masses at periodic points."""

    def __init__(self, components: Sequence[tuple[float, PeriodicPoint]]):
        if not components:
            raise ConfigError("mixture needs at least one component")
        w = np.array([c[0] for c in components], dtype=float)
        if np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-12):
            raise ConfigError("mixture weights must be non-negative and sum to 1")
        self.components = [(float(wi), pt) for wi, (_, pt) in zip(w, components)]
        self.group = components[0][1].group
        self.depth = components[0][1].depth

    @classmethod
    def orbit(cls, point: PeriodicPoint) -> "PeriodicMixture":
        """Uniform measure on the shift orbit of a periodic point over Z or Z^d."""
        if point.pattern.ndim == 0:
            return cls([(1.0, point)])
        shifts = list(np.ndindex(*point.pattern.shape))
        group = point.group
        pts = [point.translate(s[0] if isinstance(group, Integers) else tuple(s)) for s in shifts]
        return cls([(1.0 / len(pts), q) for q in pts])

    def site_marginal(self):
        out = np.zeros(2**self.depth)
        e = self.group.identity
        for w, pt in self.components:
            out[pt[e]] += w
        return out

    def pattern_prob(self, window, pattern):
        pattern = tuple(pattern)
        return float(sum(w for w, pt in self.components if tuple(pt[h] for h in window) == pattern))

    def atoms(self):
        return list(self.components)

    def sample_point(self, rng, window):
        w = np.array([c[0] for c in self.components])
        return self.components[int(rng.choice(len(w), p=w))][1]

    def to_spec(self):
        return {"kind": "periodic-mixture", "depth": self.depth, "components": [[w, pt.to_spec()] for w, pt in self.components]}


class ExplicitMarginal(MeasureModel):
    """A measure known only through its marginal on one window."""

    def __init__(self, group: Group, depth: int, window: Sequence, dist: dict):
        self.group = group
        self.depth = depth
        self.window = tuple(window)
        total = sum(dist.values())
        if not math.isclose(total, 1.0, abs_tol=1e-12):
            raise ConfigError("marginal must sum to 1")
        self.dist = {tuple(k): float(v) for k, v in dist.items()}

    def site_marginal(self):
        e = self.group.identity
        if e not in self.window:
            raise ConfigError("window does not contain the identity")
        i = self.window.index(e)
        out = np.zeros(2**self.depth)
        for pat, w in self.dist.items():
            out[pat[i]] += w
        return out

    def pattern_prob(self, window, pattern):
        window = tuple(window)
        idx = []
        for h in window:
            if h not in self.window:
                raise InsufficientWindow(f"marginal not known at {self.group.format(h)!r}")
            idx.append(self.window.index(h))
        return float(sum(w for pat, w in self.dist.items() if tuple(pat[i] for i in idx) == tuple(pattern)))

    def sample_point(self, rng, window):
        if not set(window) <= set(self.window):
            raise InsufficientWindow("explicit marginal cannot be sampled beyond its window")
        pats = list(self.dist)
        k = int(rng.choice(len(pats), p=[self.dist[p] for p in pats]))
        return WindowedPoint(self.group, dict(zip(self.window, pats[k])), self.depth)

    def to_spec(self):
        return {"kind": "explicit", "depth": self.depth, "window": [self.group.format(h) for h in self.window],
                "dist": [[list(k), v] for k, v in self.dist.items()]}


def measure_from_spec(spec: str, group: Group, depth: int) -> MeasureModel:
    """Parse ``fair``, ``bernoulli:P``, ``constant[:S]``, ``fixed-points`` or ``periodic:SYM,SYM,...``.

    Periodic words of depth-1 symbols may also be written as bit strings
    (``periodic:01``); the measure is the uniform mixture over the orbit.
    """
    kind, _, arg = spec.partition(":")
    if kind == "fair":
        return ProductMeasure(group, depth, 0.5)
    if kind == "bernoulli":
        return ProductMeasure(group, depth, float(arg))
    if kind == "constant":
        return PeriodicMixture([(1.0, constant_point(group, int(arg or 0), depth))])
    if kind in ("fixed-points", "two-fixed-points"):
        top = 2**depth - 1
        return PeriodicMixture([(0.5, constant_point(group, 0, depth)), (0.5, constant_point(group, top, depth))])
    if kind == "periodic":
        if not isinstance(group, Integers):
            raise ConfigError("periodic measures from a word are only defined on Z")
        word = [int(c) for c in arg.split(",")] if "," in arg else [int(c) for c in arg]
        return PeriodicMixture.orbit(PeriodicPoint(group, word, depth))
    raise ConfigError(f"unknown measure {spec!r}")


# --- pullback names and empirical distributions ------------------------------

def names_matrix(x: Configuration, xi: SoficMap, window: Sequence) -> np.ndarray:
    """Column ``j`` holds ``(Pi_v x)_{h_j} = x[xi_{h_j^-1}(v)]`` for every vertex ``v``."""
    if len(x) != xi.n:
        raise ConfigError("configuration length differs from vertex count")
    inv = xi.group.inv
    xi.require([inv(h) for h in window], "inverse window")
    cols = [x.symbols[xi.perm(inv(h))] for h in window]
    if not cols:
        return np.zeros((xi.n, 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def pullback_name(x: Configuration, xi: SoficMap, v: int, W: Iterable) -> WindowedPoint:
    inv = xi.group.inv
    W = list(W)
    xi.require([inv(h) for h in W], "inverse window")
    return WindowedPoint(xi.group, {h: int(x.symbols[xi.perm(inv(h))[v]]) for h in W}, x.depth)


@dataclass
class EmpiricalDistribution:
    """Law of the pullback names ``Pi_v x`` restricted to ``window`` as ``v`` ranges over V."""

    group: Group
    window: tuple
    depth: int
    counts: dict
    total: int

    @property
    def weights(self) -> dict:
        return {p: c / self.total for p, c in self.counts.items()}

    def exact_weights(self) -> dict:
        return {p: Fraction(c, self.total) for p, c in self.counts.items()}

    def marginal(self, sub: Sequence) -> "EmpiricalDistribution":
        idx = [self.window.index(h) for h in sub]
        out: dict = {}
        for p, c in self.counts.items():
            q = tuple(p[i] for i in idx)
            out[q] = out.get(q, 0) + c
        return EmpiricalDistribution(self.group, tuple(sub), self.depth, out, self.total)

    def points(self):
        """``[(weight, WindowedPoint)]`` over the support."""
        return [(c / self.total, WindowedPoint(self.group, dict(zip(self.window, p)), self.depth)) for p, c in self.counts.items()]

    def to_json(self) -> dict:
        fmt = self.group.format
        return {
            "window": [fmt(h) for h in self.window],
            "weights": {"|".join(symbol_to_bits(s, self.depth) for s in p): c / self.total for p, c in sorted(self.counts.items())},
        }


def _distribution_from_matrix(names: np.ndarray) -> tuple[dict, int]:
    rows, counts = np.unique(names, axis=0, return_counts=True)
    return {tuple(int(v) for v in r): int(c) for r, c in zip(rows, counts)}, names.shape[0]


def empirical_distribution(x: Configuration, xi: SoficMap, W: Iterable) -> EmpiricalDistribution:
    window = tuple(xi.group.sorted(W))
    counts, total = _distribution_from_matrix(names_matrix(x, xi, window))
    return EmpiricalDistribution(xi.group, window, x.depth, counts, total)


def tv_distance(emp: EmpiricalDistribution, measure: MeasureModel) -> float:
    """Total variation between the empirical window law and the measure's exact marginal."""
    covered = 0.0
    diff = 0.0
    for p, c in emp.counts.items():
        q = measure.pattern_prob(emp.window, p)
        covered += q
        diff += abs(c / emp.total - q)
    return min(1.0, max(0.0, 0.5 * (diff + max(0.0, 1.0 - covered))))


def _tv_from_counts(counts: dict, total: int, window, measure, cache: dict) -> float:
    covered = 0.0
    diff = 0.0
    for p, c in counts.items():
        q = cache.get(p)
        if q is None:
            q = cache[p] = measure.pattern_prob(window, p)
        covered += q
        diff += abs(c / total - q)
    return min(1.0, max(0.0, 0.5 * (diff + max(0.0, 1.0 - covered))))


# --- neighborhoods --------------------------------------------------------------

@dataclass(frozen=True)
class StabBlock:
    """Approximate-stabilizer constraints ``(M, delta, eps, F1, F2)`` of a neighborhood."""

    M: int
    delta: float
    eps: float
    F1: frozenset
    F2: frozenset

    def __post_init__(self):
        check_delta(self.delta)
        if not 0 < self.eps <= 1:
            raise ConfigError("eps must lie in (0, 1]")
        object.__setattr__(self, "F1", frozenset(self.F1))
        object.__setattr__(self, "F2", frozenset(self.F2))

    def read_window(self, group: Group) -> frozenset:
        """Coordinates read when testing both stabilizer conditions on a point."""
        F2sq = product_set(self.F2, self.F2, group)
        tests = self.F1 | F2sq
        return tests | product_set(inverse_set(self.F1, group), tests, group)

    def to_json(self, group: Group) -> dict:
        return {"M": self.M, "delta": self.delta, "eps": self.eps,
                "F1": [group.format(g) for g in group.sorted(self.F1)],
                "F2": [group.format(g) for g in group.sorted(self.F2)]}


@dataclass(frozen=True)
class Neighborhood:
    """Total-variation ball around a measure's window marginal, optionally with a stabilizer block."""

    window: frozenset
    reference: MeasureModel
    tv_radius: float
    stab: StabBlock | None = None

    def __post_init__(self):
        object.__setattr__(self, "window", frozenset(self.window))
        if not 0 < self.tv_radius <= 1:
            raise ConfigError("tv_radius must lie in (0, 1]")

    @property
    def depth(self) -> int:
        return self.reference.depth

    @property
    def group(self) -> Group:
        return self.reference.group

    def full_window(self) -> tuple:
        W = set(self.window)
        if self.stab is not None:
            W |= self.stab.read_window(self.group)
        return tuple(self.group.sorted(W))

    def tightened(self, tv_radius=None, stab=None) -> "Neighborhood":
        return Neighborhood(self.window, self.reference, tv_radius or self.tv_radius, stab or self.stab)

    def to_json(self) -> dict:
        g = self.group
        return {"window": [g.format(h) for h in g.sorted(self.window)], "tv_radius": self.tv_radius,
                "reference": self.reference.to_spec(), "stab": self.stab.to_json(g) if self.stab else None}


@dataclass
class ModelCheck:
    tv: float
    small_stab_mass: float | None = None
    unstable_stab_mass: float | None = None
    member: bool = False


class ModelTester:
    """Reusable membership test for ``Map(O, xi)``; caches per-pattern reference probabilities."""

    def __init__(self, O: Neighborhood, xi: SoficMap):
        if O.group != xi.group:
            raise ConfigError("neighborhood and sofic map live on different groups")
        self.O = O
        self.xi = xi
        self.window = O.full_window()
        xi.require([xi.group.inv(h) for h in self.window], "inverse neighborhood window")
        self.tv_window = tuple(xi.group.sorted(O.window))
        self.tv_cols = [self.window.index(h) for h in self.tv_window]
        self._cache: dict = {}
        self._stab = None
        if O.stab is not None:
            from .stabilizers import StabKernel

            self._stab = StabKernel(xi.group, self.window, O.depth, O.stab)

    def check(self, x: Configuration) -> ModelCheck:
        names = names_matrix(x, self.xi, self.window)
        counts, total = _distribution_from_matrix(names[:, self.tv_cols])
        tv = _tv_from_counts(counts, total, self.tv_window, self.O.reference, self._cache)
        res = ModelCheck(tv=tv)
        ok = tv < self.O.tv_radius
        if self._stab is not None:
            small, unstable = self._stab.bad_masks(names)
            res.small_stab_mass = float(small.mean())
            res.unstable_stab_mass = float(unstable.mean())
            ok = ok and res.small_stab_mass < self.O.stab.eps and res.unstable_stab_mass < self.O.stab.eps
        res.member = bool(ok)
        return res

    def __call__(self, x: Configuration) -> bool:
        return self.check(x).member

    def check_batch(self, X: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Membership for every row of ``X`` (shape ``(k, n)``)."""
        X = np.asarray(X, dtype=np.int64)
        xi, m = self.xi, self.O.depth
        inv = xi.group.inv
        perms = np.stack([xi.perm(inv(h)) for h in self.window], axis=1)
        A = 2**m
        ncodes = A ** len(self.tv_cols)
        if ncodes > 1 << 20:
            raise ConfigError("TV window too large for batched evaluation")
        pats = np.array(np.unravel_index(np.arange(ncodes), (A,) * len(self.tv_cols))).T
        q = np.array([self.O.reference.pattern_prob(self.tv_window, tuple(int(s) for s in p)) for p in pats])
        weights = A ** np.arange(len(self.tv_cols) - 1, -1, -1)
        out = np.empty(len(X), dtype=bool)
        n = xi.n
        for start in range(0, len(X), chunk):
            B = X[start:start + chunk]
            names = B[:, perms]  # (b, n, w)
            codes = names[:, :, self.tv_cols] @ weights
            rows = np.repeat(np.arange(len(B)), n)
            counts = np.bincount(rows * ncodes + codes.ravel(), minlength=len(B) * ncodes).reshape(len(B), ncodes)
            tv = 0.5 * np.abs(counts / n - q).sum(axis=1)
            ok = tv < self.O.tv_radius
            if self._stab is not None:
                small, unstable = self._stab.bad_masks(names.reshape(-1, names.shape[2]))
                ok &= small.reshape(len(B), n).mean(axis=1) < self.O.stab.eps
                ok &= unstable.reshape(len(B), n).mean(axis=1) < self.O.stab.eps
            out[start:start + chunk] = ok
        return out


def is_good_model(x: Configuration, O: Neighborhood, xi: SoficMap) -> bool:
    return ModelTester(O, xi)(x)


# --- good-model sampling ------------------------------------------------------------

def plant(point: PeriodicPoint, xi: SoficMap) -> np.ndarray:
    """Symbols on V whose pullback names are translates of ``point``.

    Defined for constant points on any map, and for periodic points on cyclic
    rotations of Z (period dividing n) and regular representations.
    """
    n = xi.n
    if point.is_constant:
        return np.full(n, int(point.pattern.flat[0]), dtype=np.int64)
    g = xi.group
    if isinstance(g, Integers) and xi.label.startswith("cyclic:"):
        p = point.pattern.shape[0]
        if n % p:
            raise ConfigError("period must divide the cycle length")
        return point.pattern[(-np.arange(n)) % p].astype(np.int64)
    if isinstance(g, FiniteGroup) and n == g.order and xi.exact_hom and all(
        xi(s, g.identity) == s for s in g.generators
    ):
        return np.array([point[g.inv(u)] for u in range(n)], dtype=np.int64)
    raise ConfigError("cannot plant this periodic point on the given sofic map")


@dataclass
class Proposal:
    """How candidate configurations are drawn.

    ``iid``: each vertex independently from the measure's site marginal.
    ``uniform``: each vertex uniformly from the alphabet.
    ``planted``: an atom of a periodic mixture laid onto V, then every bit at
    coordinate ``>= noise_from`` flipped independently with probability ``noise``.
    """

    kind: str = "iid"
    noise: float = 0.0
    noise_from: int = 0

    def draw(self, mu: MeasureModel, xi: SoficMap, rng: np.random.Generator) -> Configuration:
        m = mu.depth
        if self.kind == "iid":
            return mu.sample_configuration(rng, xi.n)
        if self.kind == "uniform":
            return Configuration(rng.integers(0, 2**m, size=xi.n), m)
        if self.kind == "planted":
            atoms = mu.atoms()
            if atoms is None:
                raise ConfigError("planted proposal needs an atomic measure")
            w = np.array([a[0] for a in atoms])
            base = plant(atoms[int(rng.choice(len(w), p=w))][1], xi)
            if self.noise > 0 and self.noise_from < m:
                flips = rng.random((xi.n, m - self.noise_from)) < self.noise
                weights = 1 << np.arange(m - self.noise_from - 1, -1, -1)
                base = base ^ (flips.astype(np.int64) @ weights)
            return Configuration(base, m)
        raise ConfigError(f"unknown proposal {self.kind!r}")


def rejection_sample(mu: MeasureModel, xi: SoficMap, O: Neighborhood, count: int, max_tries: int, seed: int,
                     proposal: Proposal | None = None, threads: int = 1, stream: int = 1):
    """Draw candidates until ``count`` pass the membership test; returns ``(models, tries)``.

    Try ``i`` always uses substream ``(stream, i)``, so the outcome does not
    depend on ``threads``.
    """
    if count < 0:
        raise ConfigError("count must be non-negative")
    proposal = proposal or Proposal()
    tester = ModelTester(O, xi)
    found: list[Configuration] = []
    tries = 0
    batch = max(1, threads) * 8

    def attempt(i):
        x = proposal.draw(mu, xi, rng_for(seed, stream, i))
        return x if tester(x) else None

    while len(found) < count and tries < max_tries:
        idx = range(tries, min(max_tries, tries + batch))
        for i, x in zip(idx, map_ordered(attempt, idx, threads)):
            tries = i + 1
            if x is not None:
                found.append(x)
                if len(found) == count:
                    break
    return found, tries


def sample_good_models(mu: MeasureModel, xi: SoficMap, O: Neighborhood, count: int, max_tries: int, seed: int,
                       proposal: Proposal | None = None, threads: int = 1) -> list[Configuration]:
    found, tries = rejection_sample(mu, xi, O, count, max_tries, seed, proposal, threads)
    if len(found) < count:
        raise ExhaustedTries(f"found {len(found)} of {count} good models in {tries} tries", found)
    return found
