"""Value lattices and fibre elements (relations and predicates) over finite carriers.

A carrier is the index range ``0..n-1``. A relation over it is stored as a flat
row-major table of ``n * n`` values, a predicate as ``n`` values.
"""

import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

INF = math.inf

RELATION = "relation"
PREDICATE = "predicate"


class FibreMismatch(ValueError):
    """Raised when two fibre elements live over different fibres."""


class ValueLattice:
    """A complete lattice of finite height in which fibre entries take values.

    Subclasses provide ``top``, ``bottom``, ``leq``, ``meet`` and ``join``.
    The same method names are implemented by the batched variants below, so
    code written against a lattice can evaluate many fibre elements at once.
    """

    name = "abstract"
    top = None
    bottom = None
    # None means descending chains are finite but of unbounded length.
    height = None

    def leq(self, a, b):
        raise NotImplementedError

    def meet(self, a, b):
        raise NotImplementedError

    def join(self, a, b):
        raise NotImplementedError

    def contains(self, v):
        raise NotImplementedError

    def meet_all(self, values):
        return reduce(self.meet, values, self.top)

    def join_all(self, values):
        return reduce(self.join, values, self.bottom)

    def render(self, v):
        return str(v)

    def __repr__(self):
        return f"<{self.name}>"


class Bool2(ValueLattice):
    name = "bool"
    top = True
    bottom = False
    height = 1

    def leq(self, a, b):
        return (not a) or b

    def meet(self, a, b):
        return a and b

    def join(self, a, b):
        return a or b

    def contains(self, v):
        return v is True or v is False

    def render(self, v):
        return "1" if v else "0"


class DiscountLevel(ValueLattice):
    """Exponents ``n`` of distances ``c**n``; ``INF`` encodes distance 0.

    The fibre order on distances is the reverse of the numeric one, which on
    exponents is the usual order of ``N ∪ {∞}``: level 0 (distance 1) is the
    bottom, ``INF`` (distance 0) is the top.
    """

    name = "level"
    top = INF
    bottom = 0
    height = None

    def leq(self, a, b):
        return a <= b

    def meet(self, a, b):
        return min(a, b)

    def join(self, a, b):
        return max(a, b)

    def discount(self, a):
        # c * c**n = c**(n+1), and c * 0 = 0.
        return a + 1

    def contains(self, v):
        if v == INF:
            return True
        return isinstance(v, int) and not isinstance(v, bool) and v >= 0

    def render(self, v):
        return "inf" if v == INF else str(v)

    def distance(self, v, c):
        """Numeric distance for a concrete constant ``c`` (display only)."""
        return 0 if v == INF else c ** v


BOOL = Bool2()
LEVELS = DiscountLevel()


class _BoolBatch:
    """Boolean lattice operations on numpy arrays, one entry per instance."""

    name = "bool-batch"
    top = True
    bottom = False
    meet = staticmethod(np.logical_and)
    join = staticmethod(np.logical_or)

    def meet_all(self, values):
        return reduce(np.logical_and, values, True)

    def join_all(self, values):
        return reduce(np.logical_or, values, False)


class _LevelBatch:
    name = "level-batch"
    top = np.inf
    bottom = 0.0
    meet = staticmethod(np.minimum)
    join = staticmethod(np.maximum)

    def discount(self, a):
        return a + 1

    def meet_all(self, values):
        return reduce(np.minimum, values, np.inf)

    def join_all(self, values):
        return reduce(np.maximum, values, 0.0)


BOOL_BATCH = _BoolBatch()
LEVELS_BATCH = _LevelBatch()


def batch_ops(lattice):
    return BOOL_BATCH if lattice is BOOL else LEVELS_BATCH


@dataclass(frozen=True)
class FibreElement:
    lattice: ValueLattice
    kind: str
    size: int
    values: tuple

    def __post_init__(self):
        expected = self.size * self.size if self.kind == RELATION else self.size
        if self.kind not in (RELATION, PREDICATE):
            raise ValueError(f"unknown fibre kind {self.kind!r}")
        if len(self.values) != expected:
            raise ValueError(f"{self.kind} over {self.size} states needs {expected} entries, got {len(self.values)}")
        for v in self.values:
            if not self.lattice.contains(v):
                raise ValueError(f"{v!r} is not an element of {self.lattice.name}")

    def at(self, x, y=None):
        if self.kind == RELATION:
            return self.values[x * self.size + y]
        return self.values[x]

    def rows(self):
        n = self.size
        return [self.values[i * n:(i + 1) * n] for i in range(n)]

    def pairs(self):
        """Related pairs (Boolean relations) in row-major order."""
        n = self.size
        return [(x, y) for x in range(n) for y in range(n) if self.values[x * n + y]]

    def members(self):
        return [x for x in range(self.size) if self.values[x]]

    def converse(self):
        n = self.size
        return FibreElement(self.lattice, RELATION, n,
                            tuple(self.values[y * n + x] for x in range(n) for y in range(n)))

    def fibre(self):
        return (self.lattice, self.kind, self.size)


def tabulate(lattice, kind, size, fn: Callable):
    if kind == RELATION:
        vals = tuple(fn(x, y) for x in range(size) for y in range(size))
    else:
        vals = tuple(fn(x) for x in range(size))
    return FibreElement(lattice, kind, size, vals)


def fibre_top(size, kind, lattice):
    n = size * size if kind == RELATION else size
    return FibreElement(lattice, kind, size, (lattice.top,) * n)


def fibre_bottom(size, kind, lattice):
    n = size * size if kind == RELATION else size
    return FibreElement(lattice, kind, size, (lattice.bottom,) * n)


def diagonal(size):
    return tabulate(BOOL, RELATION, size, lambda x, y: x == y)


def relation(size, pairs):
    ps = set(pairs)
    return tabulate(BOOL, RELATION, size, lambda x, y: (x, y) in ps)


def predicate(size, members):
    ms = set(members)
    return tabulate(BOOL, PREDICATE, size, lambda x: x in ms)


def _same_fibre(a, b):
    if a.fibre() != b.fibre():
        raise FibreMismatch(f"fibres differ: {a.kind}/{a.size}/{a.lattice.name} vs {b.kind}/{b.size}/{b.lattice.name}")


def fibre_leq(a, b):
    _same_fibre(a, b)
    leq = a.lattice.leq
    return all(leq(u, v) for u, v in zip(a.values, b.values))


def fibre_meet(a, b):
    _same_fibre(a, b)
    meet = a.lattice.meet
    return FibreElement(a.lattice, a.kind, a.size, tuple(meet(u, v) for u, v in zip(a.values, b.values)))


def fibre_join(a, b):
    _same_fibre(a, b)
    join = a.lattice.join
    return FibreElement(a.lattice, a.kind, a.size, tuple(join(u, v) for u, v in zip(a.values, b.values)))


def reindex(f: Sequence[int], s: FibreElement):
    """Pull ``s`` back along ``f``, given as the list of images of ``0..len(f)-1``."""
    for y in f:
        if not 0 <= y < s.size:
            raise FibreMismatch(f"map sends a state to {y}, outside carrier of size {s.size}")
    n = len(f)
    if s.kind == RELATION:
        m = s.size
        vals = tuple(s.values[f[x] * m + f[y]] for x in range(n) for y in range(n))
    else:
        vals = tuple(s.values[f[x]] for x in range(n))
    return FibreElement(s.lattice, s.kind, n, vals)
