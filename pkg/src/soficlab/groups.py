"""Countable groups given by a multiplication oracle over canonical elements.

Four families are supported: the integers, free abelian groups Z^d, free groups
of finite rank and finite groups given by a Cayley table. Elements are hashable
canonical forms, so equality of forms is equality in the group:

* ``Integers``: Python ints.
* ``Lattice``: tuples of ``d`` ints.
* ``FreeGroup``: reduced words, tuples of nonzero ints where ``i`` is the i-th
  generator (1-based) and ``-i`` its inverse.
* ``FiniteGroup``: row indices into the Cayley table.

Finite windows ``F`` of a group are plain ``frozenset`` objects.
"""

from __future__ import annotations

import itertools
import string
from abc import ABC, abstractmethod
from functools import reduce
from math import comb
from typing import Hashable, Iterable, Sequence

from .errors import ConfigError

Element = Hashable
FiniteSubset = frozenset


class Group(ABC):
    kind: str

    @property
    @abstractmethod
    def identity(self) -> Element: ...

    @abstractmethod
    def mul(self, a, b): ...

    @abstractmethod
    def inv(self, a): ...

    @property
    @abstractmethod
    def generators(self) -> tuple: ...

    @abstractmethod
    def word(self, g) -> list[tuple[int, int]]:
        """A word ``[(generator index, +1 or -1), ...]`` whose product is ``g``."""

    @abstractmethod
    def length(self, g) -> int:
        """Word length with respect to ``generators``."""

    @abstractmethod
    def ball_size(self, radius: int) -> int: ...

    @abstractmethod
    def to_spec(self) -> dict: ...

    def sort_key(self, g):
        return (self.length(g), g)

    def sorted(self, elements: Iterable) -> list:
        return sorted(elements, key=self.sort_key)

    def format(self, g):
        return g

    def parse(self, value):
        return value

    def prod(self, *elements):
        return reduce(self.mul, elements, self.identity)

    def __eq__(self, other):
        return type(self) is type(other) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash(repr(self.to_spec()))


class Integers(Group):
    kind = "integers"

    @property
    def identity(self):
        return 0

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    @property
    def generators(self):
        return (1,)

    def word(self, g):
        return [(0, 1 if g > 0 else -1)] * abs(g)

    def length(self, g):
        return abs(g)

    def sort_key(self, g):
        return (abs(g), g)

    def ball_size(self, radius):
        return 2 * radius + 1

    def to_spec(self):
        return {"kind": self.kind}

    def __repr__(self):
        return "Integers()"


class Lattice(Group):
    """The free abelian group Z^d with the standard basis as generators."""

    kind = "abelian"

    def __init__(self, d: int):
        if d < 1:
            raise ConfigError("lattice rank must be >= 1")
        self.d = d

    @property
    def identity(self):
        return (0,) * self.d

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    @property
    def generators(self):
        return tuple(tuple(int(i == j) for j in range(self.d)) for i in range(self.d))

    def word(self, g):
        out = []
        for i, c in enumerate(g):
            out.extend([(i, 1 if c > 0 else -1)] * abs(c))
        return out

    def length(self, g):
        return sum(abs(c) for c in g)

    def ball_size(self, radius):
        # lattice points with l1 norm <= radius
        return sum(2**k * comb(self.d, k) * comb(radius, k) for k in range(min(self.d, radius) + 1))

    def format(self, g):
        return list(g)

    def parse(self, value):
        return tuple(int(c) for c in value)

    def to_spec(self):
        return {"kind": self.kind, "d": self.d}

    def __repr__(self):
        return f"Lattice({self.d})"


class FreeGroup(Group):
    kind = "free"

    def __init__(self, d: int):
        if d < 1:
            raise ConfigError("free group rank must be >= 1")
        if d > 26:
            raise ConfigError("free group rank must be <= 26")
        self.d = d

    @property
    def identity(self):
        return ()

    def mul(self, a, b):
        # cancel the longest suffix of a against the prefix of b
        i = 0
        la = len(a)
        while i < la and i < len(b) and a[la - 1 - i] == -b[i]:
            i += 1
        return a[: la - i] + b[i:]

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    @property
    def generators(self):
        return tuple((i,) for i in range(1, self.d + 1))

    def word(self, g):
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in g]

    def length(self, g):
        return len(g)

    def sort_key(self, g):
        # a < A < b < B < ...
        return (len(g), tuple(2 * abs(x) + (x < 0) for x in g))

    def ball_size(self, radius):
        if self.d == 1:
            return 2 * radius + 1
        q = 2 * self.d - 1
        return 1 + 2 * self.d * (q**radius - 1) // (q - 1)

    def format(self, g):
        letters = string.ascii_lowercase
        return "".join(letters[x - 1] if x > 0 else letters[-x - 1].upper() for x in g) or "1"

    def parse(self, value):
        if value in ("", "1", "e"):
            return ()
        out = ()
        for ch in value:
            i = string.ascii_lowercase.index(ch.lower()) + 1
            if i > self.d:
                raise ConfigError(f"letter {ch!r} exceeds rank {self.d}")
            out = self.mul(out, (i if ch.islower() else -i,))
        return out

    def to_spec(self):
        return {"kind": self.kind, "d": self.d}

    def __repr__(self):
        return f"FreeGroup({self.d})"


class FiniteGroup(Group):
    """A finite group given by its Cayley table ``table[a][b] = a*b``."""

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]], generators: Sequence[int] | None = None):
        self.table = tuple(tuple(int(c) for c in row) for row in table)
        k = len(self.table)
        if k == 0 or any(len(row) != k for row in self.table):
            raise ConfigError("Cayley table must be square and non-empty")
        full = set(range(k))
        for row in self.table:
            if set(row) != full:
                raise ConfigError("Cayley table rows must be permutations")
        for j in range(k):
            if {self.table[i][j] for i in range(k)} != full:
                raise ConfigError("Cayley table columns must be permutations")
        ids = [e for e in range(k) if all(self.table[e][j] == j for j in range(k))]
        if not ids:
            raise ConfigError("Cayley table has no identity")
        self._identity = ids[0]
        self._inv = tuple(self.table[a].index(self._identity) for a in range(k))
        if generators is None:
            generators = [g for g in range(k) if g != self._identity]
        self._generators = tuple(int(g) for g in generators)
        self._dist, self._words = self._bfs()
        if len(self._dist) != k:
            raise ConfigError("generators do not generate the group")

    @property
    def order(self):
        return len(self.table)

    def _bfs(self):
        dist = {self._identity: 0}
        words = {self._identity: []}
        frontier = [self._identity]
        while frontier:
            nxt = []
            for a in frontier:
                for i, s in enumerate(self._generators):
                    for sign, t in ((1, s), (-1, self._inv[s])):
                        b = self.table[a][t]
                        if b not in dist:
                            dist[b] = dist[a] + 1
                            words[b] = words[a] + [(i, sign)]
                            nxt.append(b)
            frontier = nxt
        return dist, words

    @property
    def identity(self):
        return self._identity

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    @property
    def generators(self):
        return self._generators

    def word(self, g):
        return list(self._words[g])

    def length(self, g):
        return self._dist[g]

    def ball_size(self, radius):
        return sum(1 for r in self._dist.values() if r <= radius)

    def to_spec(self):
        return {"kind": self.kind, "table": [list(r) for r in self.table], "generators": list(self._generators)}

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"


def cyclic_table(n: int) -> list[list[int]]:
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def symmetric_table(k: int) -> tuple[list[list[int]], list[tuple[int, ...]]]:
    """Cayley table of S_k with elements listed in lexicographic order; (p*q)(i) = p(q(i))."""
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms]
    return table, perms


def group_from_spec(spec) -> Group:
    """Build a group from ``{kind, d?, table?}`` or a short string such as ``Z``, ``Z^2``, ``F2``."""
    if isinstance(spec, Group):
        return spec
    if isinstance(spec, str):
        s = spec.strip()
        if s in ("Z", "integers"):
            return Integers()
        if s.startswith("Z^"):
            return Lattice(int(s[2:]))
        if s.startswith("F") and s[1:].isdigit():
            return FreeGroup(int(s[1:]))
        if s.startswith("free:"):
            return FreeGroup(int(s[5:]))
        if s.startswith("abelian:"):
            return Lattice(int(s[8:]))
        if s.startswith("cyclic:"):
            return FiniteGroup(cyclic_table(int(s[7:])), generators=[1])
        if s.startswith("S") and s[1:].isdigit():
            return FiniteGroup(symmetric_table(int(s[1:]))[0])
        raise ConfigError(f"unknown group {spec!r}")
    kind = spec.get("kind")
    if kind == "integers":
        return Integers()
    if kind == "abelian":
        return Lattice(int(spec.get("d", 1)))
    if kind == "free":
        return FreeGroup(int(spec.get("d", 2)))
    if kind == "finite":
        if "table" not in spec:
            raise ConfigError("finite group needs a table")
        return FiniteGroup(spec["table"], spec.get("generators"))
    raise ConfigError(f"unknown group kind {kind!r}")


def ball(group: Group, radius: int) -> frozenset:
    """All products of at most ``radius`` generators and inverse generators."""
    if radius < 0:
        raise ConfigError("radius must be non-negative")
    letters = list(group.generators) + [group.inv(s) for s in group.generators]
    seen = {group.identity}
    frontier = [group.identity]
    for _ in range(radius):
        nxt = []
        for a in frontier:
            for s in letters:
                b = group.mul(a, s)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(seen)


def product_set(A: Iterable, B: Iterable, group: Group) -> frozenset:
    B = list(B)
    return frozenset(group.mul(a, b) for a in A for b in B)


def power_set(F: Iterable, k: int, group: Group) -> frozenset:
    """The k-fold product ``F^k`` (``{1}`` for k = 0)."""
    F = frozenset(F)
    out = frozenset([group.identity])
    for _ in range(k):
        out = product_set(out, F, group)
    return out


def inverse_set(F: Iterable, group: Group) -> frozenset:
    return frozenset(group.inv(g) for g in F)


def symmetrize(F: Iterable, group: Group) -> frozenset:
    F = frozenset(F)
    return F | inverse_set(F, group) | {group.identity}


def interval(lo: int, hi: int) -> frozenset:
    """Integer window ``{lo, ..., hi}``."""
    return frozenset(range(lo, hi + 1))
