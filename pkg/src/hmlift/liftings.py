"""Concrete liftings of the behaviour functors, their step operators, and law checkers.

A lifting is given by a pointwise *rule*: given the lattice operations, a
relation ``R`` (any callable on pairs of carrier elements) and two
behaviours ``t1, t2``, it returns the value of the lifted relation at
``(t1, t2)``. Predicate liftings take a single behaviour. Because rules only
touch values through ``ops.meet``/``ops.join``/..., the same rule evaluates a
single relation (scalar lattice) or thousands at once (batched numpy lattice),
which is what makes exhaustive law checking affordable.

Behaviours over the carrier ``0..n-1``:

* ``dfa`` (2 x Id^A): ``(o, (x_a, x_b, ...))``
* ``lts`` ((P_w Id)^A): ``(frozenset, frozenset, ...)``, one set per label
* ``id``: the element itself
"""

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .fibres import (BOOL, BOOL_BATCH, INF, LEVELS, PREDICATE, RELATION,
                     FibreElement, FibreMismatch, batch_ops, tabulate)


class LawSizeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# functors

def _subsets(n):
    out = []
    for r in range(n + 1):
        out.extend(frozenset(c) for c in itertools.combinations(range(n), r))
    return out


class Functor:
    name = "abstract"

    def elements(self, n, nlabels):
        raise NotImplementedError

    def fmap(self, f, t):
        raise NotImplementedError

    def count(self, n, nlabels):
        raise NotImplementedError


class DfaFunctor(Functor):
    name = "dfa"

    def elements(self, n, nlabels):
        return [(o, ts) for o in (0, 1) for ts in itertools.product(range(n), repeat=nlabels)]

    def fmap(self, f, t):
        return (t[0], tuple(f[x] for x in t[1]))

    def count(self, n, nlabels):
        return 2 * n ** nlabels


class LtsFunctor(Functor):
    name = "lts"

    def elements(self, n, nlabels):
        return list(itertools.product(_subsets(n), repeat=nlabels))

    def fmap(self, f, t):
        return tuple(frozenset(f[x] for x in s) for s in t)

    def count(self, n, nlabels):
        return (2 ** n) ** nlabels


class IdFunctor(Functor):
    name = "id"

    def elements(self, n, nlabels):
        return list(range(n))

    def fmap(self, f, t):
        return f[t]

    def count(self, n, nlabels):
        return n


FUNCTORS = {"dfa": DfaFunctor(), "lts": LtsFunctor(), "id": IdFunctor()}


# ---------------------------------------------------------------------------
# rules

def _forth(ops, R, s1, s2):
    return ops.meet_all([ops.join_all([R(u, v) for v in s2]) for u in s1])


def _back(ops, R, s1, s2):
    return ops.meet_all([ops.join_all([R(u, v) for u in s1]) for v in s2])


def canonical_lts_rule(ops, R, t1, t2, tau=None):
    return ops.meet_all([ops.meet(_forth(ops, R, s1, s2), _back(ops, R, s1, s2))
                         for s1, s2 in zip(t1, t2)])


def simulation_lts_rule(ops, R, t1, t2, tau=None):
    return ops.meet_all([_forth(ops, R, s1, s2) for s1, s2 in zip(t1, t2)])


def canonical_dfa_rule(ops, R, t1, t2, tau=None):
    if t1[0] != t2[0]:
        return ops.bottom
    return ops.meet_all([R(u, v) for u, v in zip(t1[1], t2[1])])


def sdw_dfa_rule(ops, R, t1, t2, tau=None):
    if t1[0] != t2[0]:
        return ops.bottom
    return ops.discount(ops.meet_all([R(u, v) for u, v in zip(t1[1], t2[1])]))


def divergence_lts_rule(ops, G, t, tau=0):
    return ops.join_all([G(x) for x in t[tau]])


def identity_rule(ops, R, u, v, tau=None):
    return R(u, v)


@dataclass(frozen=True)
class Lifting:
    name: str
    functor: str
    lattice: object
    kind: str
    rule: Callable
    tau: Optional[int] = None

    def raw(self, R, *behaviours, ops=None):
        return self.rule(ops if ops is not None else self.lattice, R, *behaviours, self.tau)

    def lift_fibre(self, R, nlabels):
        """Raw lifting of a whole fibre element: returns (behaviours, element over them)."""
        elems = FUNCTORS[self.functor].elements(R.size, nlabels)
        if self.kind == RELATION:
            val = tabulate(self.lattice, RELATION, len(elems),
                           lambda i, j: self.raw(R.at, elems[i], elems[j]))
        else:
            val = tabulate(self.lattice, PREDICATE, len(elems), lambda i: self.raw(R.at, elems[i]))
        return elems, val


CANONICAL_LTS = Lifting("canonical-lts", "lts", BOOL, RELATION, canonical_lts_rule)
SIMULATION_LTS = Lifting("simulation-lts", "lts", BOOL, RELATION, simulation_lts_rule)
SDW_DFA = Lifting("sdw-dfa", "dfa", LEVELS, RELATION, sdw_dfa_rule)
CANONICAL_DFA = Lifting("canonical-dfa", "dfa", BOOL, RELATION, canonical_dfa_rule)
IDENTITY = Lifting("identity", "id", BOOL, RELATION, identity_rule)


def divergence_lifting(tau_index):
    return Lifting("divergence-lts", "lts", BOOL, PREDICATE, divergence_lts_rule, tau_index)


def lifting_for(name, system):
    """Resolve a lifting name (short or full) against a loaded system."""
    short = name.split("-")[0]
    if short == "canonical":
        return CANONICAL_DFA if system.kind == "dfa" else CANONICAL_LTS
    table = {"simulation": (SIMULATION_LTS, "lts"), "sdw": (SDW_DFA, "dfa")}
    if short in table:
        lifting, kind = table[short]
    elif short == "divergence":
        if system.kind != "lts":
            raise ValueError("divergence lifting needs an lts")
        return divergence_lifting(system.tau_index)
    else:
        raise ValueError(f"unknown lifting {name!r}")
    if system.kind != kind:
        raise ValueError(f"lifting {lifting.name} needs a {kind}, got a {system.kind}")
    return lifting


# ---------------------------------------------------------------------------
# mutants, used to show that the checkers catch broken liftings

def _swap_forth_first(ops, R, t1, t2, tau=None):
    parts = [_forth(ops, lambda u, v: R(v, u), t1[0], t2[0])]
    parts += [_forth(ops, R, s1, s2) for s1, s2 in zip(t1[1:], t2[1:])]
    return ops.meet_all(parts)


def _drop_forth_first(ops, R, t1, t2, tau=None):
    return ops.meet_all([_forth(ops, R, s1, s2) for s1, s2 in zip(t1[1:], t2[1:])])


def _size_guard_first(ops, R, t1, t2, tau=None):
    if len(t1[0]) > len(t2[0]):
        return ops.bottom
    return simulation_lts_rule(ops, R, t1, t2)


def _drop_output(ops, R, t1, t2, tau=None):
    return ops.discount(ops.meet_all([R(u, v) for u, v in zip(t1[1], t2[1])]))


MUTATIONS = {
    # forth clause on the first label compares R(y, x) instead of R(x, y)
    "swap-forth": ("simulation-lts", _swap_forth_first),
    # forth clause on the first label removed
    "drop-forth": ("simulation-lts", _drop_forth_first),
    # first label additionally demands |t1(a)| <= |t2(a)|; not natural in the carrier
    "size-guard": ("simulation-lts", _size_guard_first),
    # outputs are never compared
    "drop-output": ("sdw-dfa", _drop_output),
}


def mutant(lifting, mutation):
    base, rule = MUTATIONS[mutation]
    if lifting.name != base:
        raise ValueError(f"mutation {mutation!r} applies to {base}, not {lifting.name}")
    return replace(lifting, name=f"{lifting.name}[{mutation}]", rule=rule)


# ---------------------------------------------------------------------------
# step operators

class StepOperator:
    """R -> gamma^*(Bbar_X(R)) on the fibre over a fixed system's states."""

    def __init__(self, lifting, system):
        if lifting.functor != system.kind:
            raise ValueError(f"lifting {lifting.name} does not apply to a {system.kind}")
        self.lifting = lifting
        self.system = system
        self.size = system.size
        self.kind = lifting.kind
        self.lattice = lifting.lattice
        self._gamma = [system.gamma(x) for x in range(system.size)]

    def __call__(self, R):
        if R.fibre() != (self.lattice, self.kind, self.size):
            raise FibreMismatch(f"step over {self.size} states got a {R.kind} over {R.size}")
        g = self._gamma
        raw = self.lifting.raw
        if self.kind == RELATION:
            return tabulate(self.lattice, RELATION, self.size, lambda x, y: raw(R.at, g[x], g[y]))
        return tabulate(self.lattice, PREDICATE, self.size, lambda x: raw(R.at, g[x]))


def step_canonical(l, R):
    return StepOperator(CANONICAL_LTS, l)(R)


def step_simulation(l, R):
    return StepOperator(SIMULATION_LTS, l)(R)


def step_sdw(d, R):
    return StepOperator(SDW_DFA, d)(R)


def step_divergence(l, G):
    return StepOperator(divergence_lifting(l.tau_index), l)(G)


# ---------------------------------------------------------------------------
# law checkers

@dataclass
class LawReport:
    law: str
    lifting: str
    ok: bool
    checked: int
    counterexample: Optional[dict] = None

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        return f"{self.lifting}\t{self.law}\t{status}\t{self.checked}"


def render_behaviour(t):
    if isinstance(t, tuple) and len(t) == 2 and isinstance(t[0], int) and isinstance(t[1], tuple):
        return f"({t[0]}, [{', '.join(map(str, t[1]))}])"
    if isinstance(t, tuple):
        return "[" + ", ".join("{" + ", ".join(map(str, sorted(s))) + "}" for s in t) + "]"
    return str(t)


def _level_grid(cells):
    vals = (0, 1, 2, INF)
    rows = list(itertools.product(vals, repeat=cells))
    return np.array(rows, dtype=float).reshape(len(rows), cells).T.copy()


def _bool_grid(cells):
    idx = np.arange(2 ** cells)
    return ((idx[None, :] >> np.arange(cells)[:, None]) & 1).astype(bool)


def _value_grid(lattice, cells):
    """All fibre elements with ``cells`` entries, as a (cells, count) array."""
    return _bool_grid(cells) if lattice is BOOL else _level_grid(cells)


def _scalar(lattice, v):
    if lattice is BOOL:
        return bool(v)
    return INF if v == np.inf else int(v)


def _mismatch(a, b, count):
    a = np.broadcast_to(np.asarray(a), (count,))
    b = np.broadcast_to(np.asarray(b), (count,))
    bad = np.nonzero(a != b)[0]
    return int(bad[0]) if len(bad) else None


def check_fibration_map(lifting, nx, ny, nlabels=1):
    """Check (Bf)^* . Bbar_Y = Bbar_X . f^* for every f: X -> Y and every S over Y.

    Level-valued S range over the truncated value set {0, 1, 2, inf}.
    """
    if nx > 3 or ny > 3 or nlabels > 2:
        raise LawSizeError("fibration-map check enumerates carriers of size <= 3 and at most 2 labels")
    functor = FUNCTORS[lifting.functor]
    ops = batch_ops(lifting.lattice)
    rel = lifting.kind == RELATION
    cells = ny * ny if rel else ny
    grid = _value_grid(lifting.lattice, cells)
    count = grid.shape[1]
    elems = functor.elements(nx, nlabels)
    checked = 0
    for f in itertools.product(range(ny), repeat=nx):
        cache = {}
        if rel:
            S = lambda u, v: grid[u * ny + v]
            fS = lambda u, v: grid[f[u] * ny + f[v]]
            points = [(t1, t2) for t1 in elems for t2 in elems]
        else:
            S = lambda u: grid[u]
            fS = lambda u: grid[f[u]]
            points = [(t,) for t in elems]
        for pt in points:
            image = tuple(functor.fmap(f, t) for t in pt)
            if image not in cache:
                cache[image] = lifting.raw(S, *image, ops=ops)
            lhs = cache[image]
            rhs = lifting.raw(fS, *pt, ops=ops)
            checked += count
            j = _mismatch(lhs, rhs, count)
            if j is not None:
                lhs_j = np.broadcast_to(np.asarray(lhs), (count,))[j]
                rhs_j = np.broadcast_to(np.asarray(rhs), (count,))[j]
                return LawReport("fibration-map", lifting.name, False, checked, {
                    "f": list(f),
                    "S": [lifting.lattice.render(_scalar(lifting.lattice, v)) for v in grid[:, j]],
                    "at": [render_behaviour(t) for t in pt],
                    "(Bf)^*Bbar(S)": lifting.lattice.render(_scalar(lifting.lattice, lhs_j)),
                    "Bbar(f^*S)": lifting.lattice.render(_scalar(lifting.lattice, rhs_j)),
                })
    return LawReport("fibration-map", lifting.name, True, checked)


class _LiftTables:
    """Lifted tables of every Boolean relation R subset X x Y, computed in one batched pass."""

    def __init__(self, lifting, nlabels):
        self.lifting = lifting
        self.nlabels = nlabels
        self.functor = FUNCTORS[lifting.functor]
        self._elems = {}
        self._tables = {}

    def elems(self, n):
        if n not in self._elems:
            self._elems[n] = self.functor.elements(n, self.nlabels)
        return self._elems[n]

    def table(self, nx, ny):
        """Array (2**(nx*ny), |BX|, |BY|); relation index bit u*ny+v encodes (u, v)."""
        key = (nx, ny)
        if key not in self._tables:
            grid = _bool_grid(nx * ny)
            count = grid.shape[1]
            ex, ey = self.elems(nx), self.elems(ny)
            out = np.zeros((count, len(ex), len(ey)), dtype=bool)
            R = lambda u, v: grid[u * ny + v]
            for i, t1 in enumerate(ex):
                for j, t2 in enumerate(ey):
                    out[:, i, j] = self.lifting.raw(R, t1, t2, ops=BOOL_BATCH)
            self._tables[key] = out
        return self._tables[key]


def _relation_bits(nx, ny):
    """Every relation X x Y as an array (2**(nx*ny), nx, ny), indexed as in _LiftTables."""
    grid = _bool_grid(nx * ny)
    return grid.T.reshape(grid.shape[1], nx, ny)


def _encode(bits):
    """Relation bit arrays (..., nx, ny) to integer indices."""
    flat = bits.reshape(bits.shape[:-2] + (-1,)).astype(np.int64)
    weights = 1 << np.arange(flat.shape[-1], dtype=np.int64)
    return flat @ weights


def _decode(index, nx, ny):
    return [(u, v) for u in range(nx) for v in range(ny) if (index >> (u * ny + v)) & 1]


def check_fibration(lifting, max_size=3, nlabels=1):
    """Run :func:`check_fibration_map` over every pair of carriers of size <= max_size."""
    checked = 0
    for nx in range(max_size + 1):
        for ny in range(max_size + 1):
            r = check_fibration_map(lifting, nx, ny, nlabels)
            checked += r.checked
            if not r.ok:
                r.checked = checked
                r.counterexample = {"X": nx, "Y": ny, **r.counterexample}
                return r
    return LawReport("fibration-map", lifting.name, True, checked)


def check_lax_extension(lifting, max_size=3, nlabels=1):
    """Exhaustively check the four lax-extension clauses on carriers of size <= max_size.

    Returns one :class:`LawReport` per clause: converse, monotonicity,
    composition, graph.
    """
    if lifting.lattice is not BOOL or lifting.kind != RELATION:
        raise ValueError("lax extensions are Boolean relation liftings")
    if max_size > 3 or nlabels > 2:
        raise LawSizeError("lax-extension check enumerates carriers of size <= 3 and at most 2 labels")
    tabs = _LiftTables(lifting, nlabels)
    sizes = range(max_size + 1)
    reports = []

    # (1) Bbar(R^o) = (Bbar R)^o
    checked, cex = 0, None
    for nx in sizes:
        for ny in sizes:
            T, Tc = tabs.table(nx, ny), tabs.table(ny, nx)
            bits = _relation_bits(nx, ny)
            conv = _encode(np.swapaxes(bits, 1, 2))
            bad = np.nonzero(~np.all(Tc[conv] == np.swapaxes(T, 1, 2), axis=(1, 2)))[0]
            checked += len(bits)
            if len(bad) and cex is None:
                r = int(bad[0])
                cex = {"X": nx, "Y": ny, "R": _decode(r, nx, ny),
                       "at": _first_diff(Tc[conv[r]], T[r].T, tabs.elems(ny), tabs.elems(nx))}
    reports.append(LawReport("converse", lifting.name, cex is None, checked, cex))

    # (2) R <= S implies Bbar R <= Bbar S. Checking all covers R <= R + {p}
    # suffices: any R <= S is a chain of single-pair additions.
    checked, cex = 0, None
    for nx in sizes:
        for ny in sizes:
            T = tabs.table(nx, ny)
            idx = np.arange(T.shape[0])
            for c in range(nx * ny):
                lower = idx[(idx >> c) & 1 == 0]
                upper = lower | (1 << c)
                ok = np.all(~T[lower] | T[upper], axis=(1, 2))
                checked += len(lower)
                bad = np.nonzero(~ok)[0]
                if len(bad) and cex is None:
                    r = int(lower[bad[0]])
                    cex = {"X": nx, "Y": ny, "R": _decode(r, nx, ny), "S": _decode(r | (1 << c), nx, ny)}
    reports.append(LawReport("monotonicity", lifting.name, cex is None, checked, cex))

    # (3) Bbar R ; Bbar S <= Bbar (R ; S)
    checked, cex = 0, None
    for nx, ny, nz in itertools.product(sizes, repeat=3):
        Txy, Tyz, Txz = tabs.table(nx, ny), tabs.table(ny, nz), tabs.table(nx, nz)
        bx, by, bz = len(tabs.elems(nx)), len(tabs.elems(ny)), len(tabs.elems(nz))
        s_bits = _relation_bits(ny, nz).astype(np.int64)
        ns = Tyz.shape[0]
        right = np.transpose(Tyz.astype(np.float32), (1, 0, 2)).reshape(by, ns * bz)
        for r in range(Txy.shape[0]):
            r_bits = _relation_bits(nx, ny)[r].astype(np.int64)
            comp_idx = _encode((r_bits[None] @ s_bits) > 0)
            lifted_comp = (Txy[r].astype(np.float32) @ right).reshape(bx, ns, bz).transpose(1, 0, 2) > 0
            ok = np.all(~lifted_comp | Txz[comp_idx], axis=(1, 2))
            checked += len(ok)
            bad = np.nonzero(~ok)[0]
            if len(bad) and cex is None:
                s = int(bad[0])
                cex = {"X": nx, "Y": ny, "Z": nz, "R": _decode(r, nx, ny), "S": _decode(s, ny, nz)}
    reports.append(LawReport("composition", lifting.name, cex is None, checked, cex))

    # (4) Bbar Gr(f) = Gr(Bf)
    checked, cex = 0, None
    for nx in sizes:
        for ny in sizes:
            T = tabs.table(nx, ny)
            ex, ey = tabs.elems(nx), tabs.elems(ny)
            pos = {t: j for j, t in enumerate(ey)}
            for f in itertools.product(range(ny), repeat=nx):
                g = sum(1 << (u * ny + f[u]) for u in range(nx))
                want = np.zeros((len(ex), len(ey)), dtype=bool)
                for i, t in enumerate(ex):
                    want[i, pos[tabs.functor.fmap(f, t)]] = True
                checked += 1
                if not np.array_equal(T[g], want) and cex is None:
                    cex = {"X": nx, "Y": ny, "f": list(f), "at": _first_diff(T[g], want, ex, ey)}
    reports.append(LawReport("graph", lifting.name, cex is None, checked, cex))
    return reports


def _first_diff(a, b, rows, cols):
    i, j = map(int, np.argwhere(a != b)[0])
    return [render_behaviour(rows[i]), render_behaviour(cols[j])]
