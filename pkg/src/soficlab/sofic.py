"""Sofic maps G -> Sym(V) stored on a finite support window, and their defects."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from ._rng import rng_for
from .errors import ConfigError, InconsistentHom, SupportTooSmall
from .groups import FreeGroup, Group, Integers, Lattice, FiniteGroup, ball


def identity_perm(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.intp)


def compose(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``p o q``, i.e. ``v -> p[q[v]]``."""
    return p[q]


def invert(p: np.ndarray) -> np.ndarray:
    out = np.empty_like(p)
    out[p] = np.arange(len(p), dtype=p.dtype)
    return out


def is_permutation(p: np.ndarray) -> bool:
    n = len(p)
    return p.ndim == 1 and bool(np.all((p >= 0) & (p < n))) and len(np.unique(p)) == n


def _frozen(p) -> np.ndarray:
    a = np.array(p, dtype=np.intp)
    a.setflags(write=False)
    return a


class SoficMap:
    """A map ``g -> xi_g`` from a finite support window into permutations of ``range(n)``.

    ``extend`` is set for maps obtained by restricting an honest homomorphism
    G -> Sym(V); such maps can be enlarged to any window with ``extended`` and
    satisfy every composition identity exactly (``exact_hom``).
    """

    def __init__(
        self,
        group: Group,
        n: int,
        table: Mapping,
        symmetric: bool = False,
        exact_hom: bool = False,
        extend: Callable | None = None,
        label: str = "",
    ):
        if n < 1:
            raise ConfigError("vertex count must be >= 1")
        self.group = group
        self.n = int(n)
        self._table = {g: _frozen(p) for g, p in table.items()}
        for g, p in self._table.items():
            if p.shape != (self.n,):
                raise ConfigError(f"permutation for {g!r} has wrong length")
        e = group.identity
        if e in self._table and not np.array_equal(self._table[e], identity_perm(self.n)):
            raise ConfigError("identity element must map to the identity permutation")
        self.symmetric = symmetric
        self.exact_hom = exact_hom
        self._extend = extend
        self.label = label

    @property
    def support(self) -> frozenset:
        return frozenset(self._table)

    def covers(self, F: Iterable) -> bool:
        return all(g in self._table for g in F)

    def require(self, F: Iterable, what: str = "window"):
        missing = [g for g in F if g not in self._table]
        if missing:
            shown = [self.group.format(g) for g in self.group.sorted(missing)[:5]]
            raise SupportTooSmall(f"{len(missing)} elements of the {what} lie outside the support, e.g. {shown}")

    def perm(self, g) -> np.ndarray:
        try:
            return self._table[g]
        except KeyError:
            raise SupportTooSmall(f"{self.group.format(g)!r} is outside the support") from None

    def __call__(self, g, v):
        return int(self.perm(g)[v])

    def extended(self, F: Iterable) -> "SoficMap":
        """A copy whose support also contains ``F``; only for homomorphism-backed maps."""
        F = [g for g in F if g not in self._table]
        if not F:
            return self
        if self._extend is None:
            self.require(F)
        table = dict(self._table)
        for g in F:
            table[g] = self._extend(g)
        return SoficMap(self.group, self.n, table, self.symmetric, self.exact_hom, self._extend, self.label)

    def restricted(self, F: Iterable) -> "SoficMap":
        F = list(F)
        self.require(F)
        return SoficMap(self.group, self.n, {g: self._table[g] for g in F}, self.symmetric, self.exact_hom, self._extend, self.label)

    def corrupted(self, g, v: int, u: int) -> "SoficMap":
        """Swap the images of ``v`` and ``u`` under ``xi_g``; the result is no longer a homomorphism."""
        p = np.array(self.perm(g))
        p[[v, u]] = p[[u, v]]
        table = dict(self._table)
        table[g] = p
        return SoficMap(self.group, self.n, table, symmetric=False, exact_hom=False, extend=None, label=self.label + "+corrupt")

    def check_symmetric(self) -> bool:
        ident = identity_perm(self.n)
        for g, p in self._table.items():
            gi = self.group.inv(g)
            if gi in self._table and not np.array_equal(p[self._table[gi]], ident):
                return False
        return True

    def to_json(self, with_perms: bool = False) -> dict:
        out = {
            "n": self.n,
            "support": [self.group.format(g) for g in self.group.sorted(self._table)],
            "symmetric": self.symmetric,
            "exact_hom": self.exact_hom,
        }
        if with_perms:
            out["perms"] = {str(self.group.format(g)): self._table[g].tolist() for g in self.group.sorted(self._table)}
        return out


def _word_perm(group: Group, images: list[np.ndarray], inverses: list[np.ndarray], n: int):
    def extend(g):
        r = identity_perm(n)
        for i, sign in reversed(group.word(g)):
            r = (images[i] if sign > 0 else inverses[i])[r]
        return r

    return extend


def build_cyclic(n: int, support: Iterable[int]) -> SoficMap:
    """Rotation action of Z on Z/n: ``xi_g(v) = v + g mod n``."""
    group = Integers()
    base = identity_perm(n)

    def extend(g):
        return (base + g) % n

    return SoficMap(group, n, {g: extend(g) for g in support}, symmetric=True, exact_hom=True, extend=extend, label=f"cyclic:{n}")


def build_torus(shape: tuple[int, ...], support: Iterable) -> SoficMap:
    """Translation action of Z^d on the torus ``prod Z/shape[i]``, vertices in C order."""
    shape = tuple(int(s) for s in shape)
    group = Lattice(len(shape))
    coords = np.indices(shape).reshape(len(shape), -1)
    n = coords.shape[1]

    def extend(g):
        moved = [(coords[i] + g[i]) % shape[i] for i in range(len(shape))]
        return np.ravel_multi_index(moved, shape).astype(np.intp)

    return SoficMap(group, n, {g: extend(g) for g in support}, symmetric=True, exact_hom=True, extend=extend, label=f"torus:{shape}")


def build_quotient(group: Group, hom, support: Iterable) -> SoficMap:
    """Extend generator images ``hom`` (indexed like ``group.generators``) along words.

    Raises InconsistentHom when the resulting table violates ``xi_a xi_b = xi_ab``
    for some ``a, b, ab`` in the support.
    """
    if isinstance(hom, Mapping):
        hom = [hom[s] for s in group.generators]
    images = [_frozen(p) for p in hom]
    if len(images) != len(group.generators):
        raise ConfigError("need one permutation per generator")
    n = len(images[0])
    for p in images:
        if len(p) != n or not is_permutation(p):
            raise ConfigError("generator images must be permutations of a common vertex set")
    inverses = [invert(p) for p in images]
    extend = _word_perm(group, images, inverses, n)
    support = frozenset(support) | {group.identity}
    table = {g: extend(g) for g in support}
    for a in support:
        for b in support:
            ab = group.mul(a, b)
            if ab in table and not np.array_equal(table[a][table[b]], table[ab]):
                raise InconsistentHom(f"xi({group.format(a)}) xi({group.format(b)}) != xi({group.format(ab)})")
    if isinstance(group, (Integers, FreeGroup)):
        exact = True
    elif isinstance(group, Lattice):
        exact = all(np.array_equal(p[q], q[p]) for p in images for q in images)
    else:
        # relations are verified exhaustively once the support is the whole group
        exact = isinstance(group, FiniteGroup) and len(support) == group.order
    qmap = SoficMap(group, n, table, symmetric=False, exact_hom=exact, extend=extend if exact else None, label="quotient")
    qmap.symmetric = qmap.check_symmetric()
    return qmap


def regular_representation(group: FiniteGroup) -> SoficMap:
    """Left multiplication of a finite group on itself; free, exact, symmetric."""
    hom = [np.array(group.table[s], dtype=np.intp) for s in group.generators]
    return build_quotient(group, hom, range(group.order))


def sample_free(d: int, n: int, radius: int, seed: int) -> SoficMap:
    """Uniform random homomorphism from the free group F_d into Sym(n), stored on ``ball(radius)``."""
    if d < 1 or n < 2:
        raise ConfigError("need d >= 1 and n >= 2")
    group = FreeGroup(d)
    rng = rng_for(seed, 0)
    images = [rng.permutation(n).astype(np.intp) for _ in range(d)]
    inverses = [invert(p) for p in images]
    extend = _word_perm(group, images, inverses, n)
    table = {}
    # grow by prefixes so each entry costs one composition
    for g in sorted(ball(group, radius), key=len):
        if not g:
            table[g] = identity_perm(n)
        else:
            head = g[0]
            p = images[head - 1] if head > 0 else inverses[-head - 1]
            table[g] = p[table[g[1:]]]
    return SoficMap(group, n, table, symmetric=True, exact_hom=True, extend=extend, label=f"free:{d}:{n}")


@dataclass(frozen=True)
class RandomSoficModel:
    """Seeded law on sofic maps of a free group (uniform homomorphisms)."""

    d: int
    n: int
    radius: int

    def sample(self, seed: int) -> SoficMap:
        return sample_free(self.d, self.n, self.radius, seed)


@dataclass
class ApproxQuality:
    hom_defect: dict = field(default_factory=dict)
    fix_defect: dict = field(default_factory=dict)
    symmetric: bool = True

    @property
    def max_hom_defect(self) -> float:
        return max(self.hom_defect.values(), default=0.0)

    @property
    def max_fix_defect(self) -> float:
        return max(self.fix_defect.values(), default=0.0)

    def is_approximation(self, eps: float) -> bool:
        return self.max_hom_defect < eps and self.max_fix_defect < eps

    def to_json(self, group: Group) -> dict:
        fmt = group.format
        return {
            "max_hom_defect": self.max_hom_defect,
            "max_fix_defect": self.max_fix_defect,
            "symmetric": self.symmetric,
            "fix_defect": {str(fmt(g)): v for g, v in self.fix_defect.items()},
            "hom_defect_nonzero": [[fmt(g), fmt(h), v] for (g, h), v in self.hom_defect.items() if v > 0],
        }


def quality(xi: SoficMap, F: Iterable) -> ApproxQuality:
    """Exact multiplication and fixed-point defects of ``xi`` on the window ``F``."""
    group = xi.group
    F = group.sorted(F)
    xi.require(F)
    n = xi.n
    ident = identity_perm(n)
    hom = {}
    for g in F:
        pg = xi.perm(g)
        for h in F:
            gh = group.mul(g, h)
            hom[(g, h)] = float(np.count_nonzero(pg[xi.perm(h)] != xi.perm(gh))) / n
    fix = {g: float(np.count_nonzero(xi.perm(g) == ident)) / n for g in F if g != group.identity}
    return ApproxQuality(hom, fix, xi.check_symmetric())
