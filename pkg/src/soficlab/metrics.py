"""Metrics on configurations and the separated sets and coverings they define.

Separation is strict everywhere: a set is delta-separated when all pairwise
distances exceed delta. Coverings use closed balls centred at points of the
set, which is the convention under which both

    sep_{2 delta} <= cov_delta <= sep_delta

hold with no boundary exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, EmptyRestriction, LengthMismatch, TooLarge
from .shift import Configuration, distance_table


def _symbols(x) -> tuple[np.ndarray, int | None]:
    if isinstance(x, Configuration):
        return x.symbols, x.depth
    return np.asarray(x, dtype=np.int64), None


def _depth(dx, dy, depth):
    if dx is not None and dy is not None and dx != dy:
        raise LengthMismatch("configurations have different depths")
    d = depth or dx or dy
    if d is None:
        raise ConfigError("depth is required for raw symbol arrays")
    return d


def dV(x, y, depth: int | None = None) -> float:
    """Average site distance."""
    a, da = _symbols(x)
    b, db = _symbols(y)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {len(a)} and {len(b)} differ")
    if len(a) == 0:
        raise LengthMismatch("empty configurations")
    return float(distance_table(_depth(da, db, depth))[a ^ b].mean())


def dinf(x, y, D, depth: int | None = None) -> float:
    """Largest site distance over the vertex subset ``D``."""
    a, da = _symbols(x)
    b, db = _symbols(y)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {len(a)} and {len(b)} differ")
    D = np.asarray(sorted(D) if not isinstance(D, np.ndarray) else D, dtype=np.intp)
    if D.size == 0:
        raise EmptyRestriction("D must be non-empty")
    return float(distance_table(_depth(da, db, depth))[a[D] ^ b[D]].max())


@dataclass
class FinitePointSet:
    """Rows of ``points`` are configurations over a common index set."""

    points: np.ndarray
    depth: int
    metric: str = "avg"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.int64)
        if self.points.ndim != 2:
            raise ConfigError("points must be a 2-d array")
        if self.metric not in ("avg", "max"):
            raise ConfigError("metric must be 'avg' or 'max'")
        self._table = distance_table(self.depth)

    @classmethod
    def from_configurations(cls, xs, metric: str = "avg") -> "FinitePointSet":
        xs = list(xs)
        if not xs:
            raise ConfigError("empty point set")
        if len({len(x) for x in xs}) != 1:
            raise LengthMismatch("configurations of different lengths")
        return cls(np.stack([x.symbols for x in xs]), xs[0].depth, metric)

    def __len__(self):
        return self.points.shape[0]

    def distances_to(self, i: int, rows: np.ndarray | None = None) -> np.ndarray:
        P = self.points if rows is None else self.points[rows]
        d = self._table[P ^ self.points[i]]
        return d.mean(axis=1) if self.metric == "avg" else d.max(axis=1)

    def distance_matrix(self) -> np.ndarray:
        k = len(self)
        out = np.zeros((k, k))
        for i in range(k):
            out[i] = self.distances_to(i)
        return out


def greedy_separated(S: FinitePointSet, delta: float) -> list[int]:
    """Scan points in order, keeping each one farther than ``delta`` from all kept so far."""
    if delta <= 0:
        raise ConfigError("delta must be positive")
    kept: list[int] = []
    for i in range(len(S)):
        if not kept or S.distances_to(i, np.array(kept)).min() > delta:
            kept.append(i)
    return kept


def _max_clique(adj: list[int]) -> int:
    """Size of a maximum clique; ``adj`` holds neighbour bitsets."""
    best = 0

    def color_bound(P: int):
        # greedy colouring gives an upper bound on the clique inside P
        order, bounds = [], []
        color = 0
        U = P
        while U:
            color += 1
            Q = U
            while Q:
                v = (Q & -Q).bit_length() - 1
                Q &= ~(1 << v) & ~adj[v]
                U &= ~(1 << v)
                order.append(v)
                bounds.append(color)
        return order, bounds

    def expand(R: int, P: int):
        nonlocal best
        order, bounds = color_bound(P)
        for v, b in zip(reversed(order), reversed(bounds)):
            if R + b <= best:
                return
            newP = P & adj[v]
            if newP:
                expand(R + 1, newP)
            elif R + 1 > best:
                best = R + 1
            P &= ~(1 << v)

    expand(0, (1 << len(adj)) - 1)
    return best


def exact_separated(S: FinitePointSet, delta: float, cap: int = 24) -> int:
    """Maximum size of a delta-separated subset (maximum clique of the far-apart graph)."""
    if delta <= 0:
        raise ConfigError("delta must be positive")
    k = len(S)
    if k > cap:
        raise TooLarge(f"{k} points exceed the exact cap {cap}")
    if k == 0:
        return 0
    far = S.distance_matrix() > delta
    adj = [sum(1 << j for j in range(k) if far[i, j] and i != j) for i in range(k)]
    return _max_clique(adj)


def exact_covering(S: FinitePointSet, delta: float, cap: int = 24) -> int:
    """Fewest closed delta-balls centred at points of ``S`` that cover ``S``."""
    k = len(S)
    if k > cap:
        raise TooLarge(f"{k} points exceed the exact cap {cap}")
    if k == 0:
        return 0
    close = S.distance_matrix() <= delta
    ball = [sum(1 << j for j in range(k) if close[i, j]) for i in range(k)]
    covers_of = [[i for i in range(k) if close[i, j]] for j in range(k)]
    full = (1 << k) - 1
    biggest = max(bin(b).count("1") for b in ball)
    best = len(greedy_separated(S, delta))

    def search(covered: int, used: int):
        nonlocal best
        if covered == full:
            best = min(best, used)
            return
        left = k - bin(covered).count("1")
        if used + math.ceil(left / biggest) >= best:
            return
        # branch on the uncovered point with the fewest possible centres
        j = min((j for j in range(k) if not covered >> j & 1), key=lambda j: len(covers_of[j]))
        for i in sorted(covers_of[j], key=lambda i: -bin(ball[i] & ~covered).count("1")):
            search(covered | ball[i], used + 1)

    search(0, 0)
    return best


@dataclass
class Sandwich:
    sep_2delta: int
    cov_delta: int
    cov_delta_upper: int
    sep_delta: int

    @property
    def holds(self) -> bool:
        return self.sep_2delta <= self.cov_delta <= self.sep_delta and self.cov_delta <= self.cov_delta_upper

    def to_json(self) -> dict:
        return {**self.__dict__, "holds": self.holds}


def sep_cov_sandwich(S: FinitePointSet, delta: float, cap: int = 24) -> Sandwich:
    """Exact ``sep_{2 delta}``, ``cov_delta``, ``sep_delta`` plus the greedy covering bound."""
    return Sandwich(
        exact_separated(S, 2 * delta, cap),
        exact_covering(S, delta, cap),
        len(greedy_separated(S, delta)),
        exact_separated(S, delta, cap),
    )


def alphabet_separation(m: int, delta: float) -> int:
    """``sep_delta`` of the depth-m alphabet: two symbols are delta-far iff they
    differ among the first ``#{j : 2^-j > delta}`` coordinates."""
    if delta <= 0:
        raise ConfigError("delta must be positive")
    J = 0
    while J < m and Fraction(1, 2**J) > Fraction(delta):
        J += 1
    return 2**J


def _ultrametric_separation(points: np.ndarray, depth: int, r: float) -> int:
    """``sep_r`` under the max metric by counting classes of the relation ``d <= r``.

    The max of ultrametrics is an ultrametric, so closeness is an equivalence
    relation; this is checked before the class count is trusted.
    """
    tab = distance_table(depth)
    k = len(points)
    close = np.zeros((k, k), dtype=bool)
    for i in range(k):
        close[i] = tab[points ^ points[i]].max(axis=1) <= r
    ncomp, labels = connected_components(csr_matrix(close), directed=False)
    same = labels[:, None] == labels[None, :]
    if not np.array_equal(same, close):
        raise ConfigError("closeness is not transitive; metric is not an ultrametric")
    return int(ncomp)


@dataclass
class ProductBound:
    lhs: float
    rhs: float
    sep_product: int
    sep_alphabet: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12

    def to_json(self) -> dict:
        return {**self.__dict__, "holds": self.holds}


def product_bound_check(m: int, Dsize: int, delta: float, cap: int = 2**16) -> ProductBound:
    """Compare ``log sep_{2 delta}(chi^D, d_inf)`` with ``|D| log sep_delta(chi)`` by full enumeration."""
    total = 2 ** (m * Dsize)
    if total > cap:
        raise TooLarge(f"product space of size {total} exceeds cap {cap}")
    pts = np.array(np.unravel_index(np.arange(total), (2**m,) * Dsize)).T.astype(np.int64)
    alpha = np.arange(2**m, dtype=np.int64)[:, None]
    sp = _ultrametric_separation(pts, m, 2 * delta)
    sa = _ultrametric_separation(alpha, m, delta)
    return ProductBound(math.log(sp), Dsize * math.log(sa), sp, sa)


def log_ball_volume(n: int, m: int, delta: float, closed: bool = True) -> float:
    """Natural log of the number of configurations within d^V distance delta of a fixed one.

    The count does not depend on the centre: it is the coefficient sum up to
    degree ``T`` of ``(1 + sum_j 2^(m-1-j) z^(2^(m-1-j)))^n`` with distances in
    units of ``2^-(m-1)``.
    """
    scale = 2 ** (m - 1)
    budget = Fraction(delta) * n * scale
    T = math.floor(budget) if closed else math.ceil(budget) - 1
    if T < 0:
        return -math.inf
    T = min(T, n * scale)
    base = np.zeros(T + 1)
    base[0] = 1.0
    for j in range(m):
        w = 2 ** (m - 1 - j)
        if w <= T:
            base[w] += 2 ** (m - 1 - j)

    def mul(a, b):
        pa, sa = a
        pb, sb = b
        c = np.convolve(pa, pb)[: T + 1]
        top = c.max()
        return c / top, sa + sb + math.log(top)

    result = (np.zeros(T + 1), 0.0)
    result[0][0] = 1.0
    power = (base / base.max(), math.log(base.max()))
    e = n
    while e:
        if e & 1:
            result = mul(result, power)
        e >>= 1
        if e:
            power = mul(power, power)
    return math.log(result[0].sum()) + result[1]
