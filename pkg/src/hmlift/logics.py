"""The three modal logics, their depth-stratified formula sets, and final-sequence stages.

* words over the alphabet, for deterministic automata;
* tau-towers ``<tau>^n T``, for divergence;
* diamond/conjunction formulas in semilattice normal form, for similarity.

Formulas of depth ``i`` (the i-th stage of the initial sequence) are
enumerated by :meth:`formulas`; trees of depth ``i`` (the i-th stage of the
final sequence) by :class:`FinalSequence`. ``delta`` evaluates a formula on a
tree by structural recursion, one modal layer per tree layer.
"""

import itertools
import re
from functools import lru_cache

from .fibres import BOOL, PREDICATE, RELATION, tabulate
from .liftings import FUNCTORS


class FormulaCapExceeded(ValueError):
    pass


class StageTooLarge(ValueError):
    def __init__(self, stage, cardinality, cap):
        self.stage = stage
        self.cardinality = cardinality
        super().__init__(f"final-sequence stage {stage} has {cardinality} elements (cap {cap})")


class FormulaSyntaxError(ValueError):
    pass


DEFAULT_FORMULA_CAP = 100_000


# ---------------------------------------------------------------------------
# formulas

class HmFormula:
    """A finite set of ``(label, formula)`` diamonds, read as their conjunction.

    The empty set is ``T``. Sets give the semilattice quotient for free:
    conjunction is union, so it is associative, commutative and idempotent.
    """

    __slots__ = ("conjuncts", "depth", "size", "key", "_hash")

    def __init__(self, conjuncts=()):
        cs = frozenset(conjuncts)
        self.conjuncts = cs
        items = sorted(((a, f.sort_key) for a, f in cs))
        self.depth = 1 + max((f.depth for _, f in cs), default=-1)
        self.size = sum(1 + f.size for _, f in cs)
        self.key = tuple(items)
        self._hash = hash(cs)

    @property
    def sort_key(self):
        return (self.depth, self.size, self.key)

    def __eq__(self, other):
        return isinstance(other, HmFormula) and self.conjuncts == other.conjuncts

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __and__(self, other):
        return HmFormula(self.conjuncts | other.conjuncts)

    def ordered(self):
        return sorted(self.conjuncts, key=lambda p: (p[0], p[1].sort_key))

    def __str__(self):
        if not self.conjuncts:
            return "T"
        parts = []
        for a, f in self.ordered():
            inner = str(f)
            if len(f.conjuncts) > 1:
                inner = f"({inner})"
            parts.append(f"<{a}>{inner}")
        return " & ".join(parts)

    __repr__ = __str__


TOP = HmFormula()


def diamond(label, formula=TOP):
    return HmFormula({(label, formula)})


def conj(*formulas):
    out = frozenset()
    for f in formulas:
        out |= f.conjuncts
    return HmFormula(out)


_TOKEN = re.compile(r"\s*(?:(T)\b|(<)\s*([A-Za-z0-9_.'\-]+)\s*(>)|(&)|(\()|(\))|(\^)\s*(\d+))")


def _tokens(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected input at column {pos + 1}: {text[pos:]!r}")
        if m.group(1):
            out.append(("T", None))
        elif m.group(2):
            out.append(("<>", m.group(3)))
        elif m.group(5):
            out.append(("&", None))
        elif m.group(6):
            out.append(("(", None))
        elif m.group(7):
            out.append((")", None))
        else:
            out.append(("^", int(m.group(9))))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_hm(text, labels=None):
    """Parse ``T``, ``<a> phi``, ``phi & psi`` with parentheses into normal form."""
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos][0] if pos < len(toks) else None

    def conjunction():
        nonlocal pos
        f = unary()
        while peek() == "&":
            pos += 1
            f = f & unary()
        return f

    def unary():
        nonlocal pos
        tok = peek()
        if tok == "T":
            pos += 1
            return TOP
        if tok == "<>":
            a = toks[pos][1]
            if labels is not None and a not in labels:
                raise FormulaSyntaxError(f"unknown label {a!r}")
            pos += 1
            if peek() == "^":
                n = toks[pos][1]
                pos += 1
                f = unary() if peek() in ("T", "<>", "(") else TOP
                for _ in range(n):
                    f = diamond(a, f)
                return f
            return diamond(a, unary())
        if tok == "(":
            pos += 1
            f = conjunction()
            if peek() != ")":
                raise FormulaSyntaxError("missing ')'")
            pos += 1
            return f
        raise FormulaSyntaxError(f"unexpected token {tok!r}")

    f = conjunction()
    if pos != len(toks):
        raise FormulaSyntaxError(f"trailing input after formula {f}")
    return f


# ---------------------------------------------------------------------------
# final sequence

def stage_size(kind, nlabels, i):
    n = 1
    for _ in range(i):
        n = FUNCTORS[kind].count(n, nlabels)
    return n


def truncate(kind, t, i):
    """The connecting map b_{i,i-1}: cut a depth-i tree down to depth i-1."""
    if i <= 1:
        return ()
    if kind == "dfa":
        return (t[0], tuple(truncate(kind, c, i - 1) for c in t[1]))
    return tuple(frozenset(truncate(kind, c, i - 1) for c in s) for s in t)


def gamma_i(system, x, i, _memo=None):
    """The cone map X -> B^i 1: the depth-i unfolding of state x."""
    memo = {} if _memo is None else _memo
    key = (x, i)
    if key in memo:
        return memo[key]
    if i == 0:
        t = ()
    elif system.kind == "dfa":
        t = (system.output[x], tuple(gamma_i(system, y, i - 1, memo) for y in system.next[x]))
    else:
        t = tuple(frozenset(gamma_i(system, y, i - 1, memo) for y in ys) for ys in system.succ[x])
    memo[key] = t
    return t


def gammas(system, i):
    memo = {}
    return [gamma_i(system, x, i, memo) for x in range(system.size)]


@lru_cache(maxsize=None)
def tree_key(t):
    """A total order on trees of one stage, used for canonical listings."""
    if t == ():
        return ()
    if isinstance(t[0], int):
        return (t[0], tuple(tree_key(c) for c in t[1]))
    return tuple(tuple(sorted((tree_key(c) for c in s), key=lambda k: (len(repr(k)), repr(k)))) for s in t)


def render_tree(t, labels):
    if t == ():
        return "*"
    if isinstance(t[0], int):
        kids = ", ".join(f"{a}: {render_tree(c, labels)}" for a, c in zip(labels, t[1]))
        return f"({t[0]}; {kids})"
    parts = []
    for a, s in zip(labels, t):
        inner = sorted((render_tree(c, labels) for c in s))
        parts.append(f"{a}: {{{', '.join(inner)}}}")
    return "[" + "; ".join(parts) + "]"


class FinalSequence:
    """Materialized stages B^0 1, ..., B^depth 1 of the final sequence."""

    def __init__(self, kind, labels, depth, cap=10 ** 6):
        self.kind = kind
        self.labels = tuple(labels)
        self.depth = depth
        self.cap = cap
        functor = FUNCTORS[kind]
        stages = [[()]]
        for i in range(1, depth + 1):
            card = stage_size(kind, len(self.labels), i)
            if card > cap:
                raise StageTooLarge(i, card, cap)
            prev = stages[-1]
            idx = functor.elements(len(prev), len(self.labels))
            stages.append([functor.fmap(prev, t) for t in idx])
        self.stages = stages
        self._index = [{t: j for j, t in enumerate(s)} for s in stages]

    def stage(self, i):
        return self.stages[i]

    def index(self, i, t):
        return self._index[i][t]

    def connecting_map(self, i):
        """b_{i,i-1} as a list of positions in stage i-1."""
        return [self.index(i - 1, truncate(self.kind, t, i)) for t in self.stages[i]]

    def cone(self, system, i):
        """gamma_i as a list of positions in stage i."""
        return [self.index(i, t) for t in gammas(system, i)]


class LiftedStages:
    """The final sequence of a lifting: Bbar^0 1 = top, Bbar^{i+1} 1 = Bbar(Bbar^i 1).

    Values are computed on demand at given trees, so stages too large to
    materialize can still be queried along a system's cone.
    """

    def __init__(self, lifting):
        self.lifting = lifting
        self._memo = {}

    def value(self, i, *trees):
        key = (i,) + trees
        memo = self._memo
        if key in memo:
            return memo[key]
        if i == 0:
            v = self.lifting.lattice.top
        elif self.lifting.kind == RELATION:
            v = self.lifting.raw(lambda u, w: self.value(i - 1, u, w), *trees)
        else:
            v = self.lifting.raw(lambda u: self.value(i - 1, u), *trees)
        memo[key] = v
        return v

    def table(self, fs, i):
        ts = fs.stage(i)
        lat = self.lifting.lattice
        if self.lifting.kind == RELATION:
            return tabulate(lat, RELATION, len(ts), lambda a, b: self.value(i, ts[a], ts[b]))
        return tabulate(lat, PREDICATE, len(ts), lambda a: self.value(i, ts[a]))

    def along(self, system, i):
        """(gamma_i)^*(Bbar^i 1) over the system's states."""
        g = gammas(system, i)
        lat = self.lifting.lattice
        if self.lifting.kind == RELATION:
            return tabulate(lat, RELATION, system.size, lambda x, y: self.value(i, g[x], g[y]))
        return tabulate(lat, PREDICATE, system.size, lambda x: self.value(i, g[x]))


# ---------------------------------------------------------------------------
# logics

class Logic:
    name = "abstract"
    kind = None

    def __init__(self, labels):
        self.labels = tuple(labels)
        self._pos = {a: i for i, a in enumerate(self.labels)}

    def formulas(self, i, cap=DEFAULT_FORMULA_CAP):
        raise NotImplementedError

    def sat(self, system, x, phi):
        raise NotImplementedError

    def delta(self, i, tree, phi):
        raise NotImplementedError

    def theory(self, system, x, i, cap=DEFAULT_FORMULA_CAP):
        return {phi: int(self.sat(system, x, phi)) for phi in self.formulas(i, cap)}

    def delta_theory(self, i, tree, cap=DEFAULT_FORMULA_CAP):
        return {phi: int(self.delta(i, tree, phi)) for phi in self.formulas(i, cap)}

    def render(self, phi):
        return str(phi)

    def _check_system(self, system):
        if system.kind != self.kind:
            raise ValueError(f"the {self.name} logic does not apply to a {system.kind}")


class WordLogic(Logic):
    """Words as formulas; a state satisfies w if it accepts w.

    The discounted reading gives w the value c**len(w) when accepted, so two
    theories differ by c**n where n is the length of the shortest word on
    which they disagree.
    """

    name = "words"
    kind = "dfa"

    def formulas(self, i, cap=DEFAULT_FORMULA_CAP):
        total = sum(len(self.labels) ** n for n in range(i))
        if total > cap:
            raise FormulaCapExceeded(f"{total} words of length < {i} exceed the cap {cap}")
        out = []
        for n in range(i):
            out.extend(itertools.product(self.labels, repeat=n))
        return out

    def sat(self, d, x, w):
        self._check_system(d)
        for a in w:
            if a not in self._pos:
                raise ValueError(f"letter {a!r} is not in the alphabet")
            x = d.next[x][self._pos[a]]
        return d.output[x]

    def delta(self, i, tree, w):
        if len(w) >= i:
            raise ValueError(f"word of length {len(w)} is not in stage {i}")
        for a in w:
            tree = tree[1][self._pos[a]]
        return tree[0]

    def render(self, w):
        if not w:
            return "eps"
        sep = "" if all(len(a) == 1 for a in self.labels) else "."
        return sep.join(w)

    def parse(self, text):
        text = text.strip()
        if text in ("", "eps", "ε"):
            return ()
        if "." in text or " " in text:
            letters = [t for t in re.split(r"[.\s]+", text) if t]
        else:
            letters = list(text)
        for a in letters:
            if a not in self._pos:
                raise FormulaSyntaxError(f"letter {a!r} is not in the alphabet")
        return tuple(letters)


class TauLogic(Logic):
    """Formulas <tau>^n T, identified with n."""

    name = "tau"
    kind = "lts"

    def __init__(self, labels, tau):
        super().__init__(labels)
        if tau not in self._pos:
            raise ValueError(f"tau label {tau!r} is not among the labels")
        self.tau = tau
        self.t = self._pos[tau]

    def formulas(self, i, cap=DEFAULT_FORMULA_CAP):
        return list(range(i))

    def sat(self, l, x, n):
        self._check_system(l)
        frontier = {x}
        for _ in range(n):
            frontier = {y for u in frontier for y in l.succ[u][self.t]}
            if not frontier:
                return 0
        return 1

    def delta(self, i, tree, n):
        if n >= i:
            raise ValueError(f"<tau>^{n} T is not in stage {i}")
        if n == 0:
            return 1
        return int(any(self.delta(i - 1, c, n - 1) for c in tree[self.t]))

    def render(self, n):
        return "T" if n == 0 else f"<{self.tau}>^{n} T"

    def parse(self, text):
        f = parse_hm(text, [self.tau])
        n = 0
        while f.conjuncts:
            if len(f.conjuncts) != 1:
                raise FormulaSyntaxError("tau formulas have no conjunction")
            (_, f), = f.conjuncts
            n += 1
        return n


class HmLogic(Logic):
    """Diamonds and finite conjunction, in semilattice normal form."""

    name = "hm"
    kind = "lts"

    def __init__(self, labels):
        super().__init__(labels)
        self._stages = [[TOP]]

    def formulas(self, i, cap=DEFAULT_FORMULA_CAP):
        while len(self._stages) <= i:
            prev = self._stages[-1]
            gens = [(a, f) for a in self.labels for f in prev]
            card = 2 ** len(gens)
            if card > cap:
                raise FormulaCapExceeded(f"stage {len(self._stages)} has {card} formulas (cap {cap})")
            stage = [HmFormula(c) for r in range(len(gens) + 1) for c in itertools.combinations(gens, r)]
            stage.sort(key=lambda f: f.sort_key)
            self._stages.append(stage)
        return list(self._stages[i])

    def extension(self, l, phi, _memo=None):
        """The set of states satisfying phi."""
        self._check_system(l)
        memo = {} if _memo is None else _memo
        if phi in memo:
            return memo[phi]
        ext = set(range(l.size))
        for a, psi in phi.conjuncts:
            if a not in self._pos:
                raise ValueError(f"label {a!r} is not in the system's labels")
            inner = self.extension(l, psi, memo)
            k = self._pos[a]
            ext = {x for x in ext if any(y in inner for y in l.succ[x][k])}
        memo[phi] = frozenset(ext)
        return memo[phi]

    def sat(self, l, x, phi):
        return int(x in self.extension(l, phi))

    @lru_cache(maxsize=None)
    def delta(self, i, tree, phi):
        if i == 0:
            if phi.conjuncts:
                raise ValueError(f"{phi} is not in stage 0")
            return 1
        for a, psi in phi.conjuncts:
            if not any(self.delta(i - 1, c, psi) for c in tree[self._pos[a]]):
                return 0
        return 1

    def parse(self, text):
        return parse_hm(text, self.labels)


def logic_for(name, system):
    if name == "words":
        return WordLogic(system.labels)
    if name == "tau":
        if system.kind != "lts":
            raise ValueError("the tau logic needs an lts")
        return TauLogic(system.labels, system.tau if system.tau is not None else _no_tau())
    if name == "hm":
        return HmLogic(system.labels)
    raise ValueError(f"unknown logic {name!r}")


def _no_tau():
    raise ValueError("the tau logic needs a designated tau label")


def accepts(d, x, w):
    """Acceptance of a word (tuple or string of one-letter labels) from state x."""
    return WordLogic(d.labels).sat(d, x, tuple(w))


def sat_tau(l, x, n):
    if l.tau is None:
        raise ValueError("no tau label designated")
    return TauLogic(l.labels, l.tau).sat(l, x, n)


def sat_hm(l, x, phi):
    if isinstance(phi, str):
        phi = parse_hm(phi, l.labels)
    return HmLogic(l.labels).sat(l, x, phi)


def enumerate_formulas(logic, i, cap=DEFAULT_FORMULA_CAP):
    return logic.formulas(i, cap)


def theory_at_depth(system, x, logic, i, cap=DEFAULT_FORMULA_CAP):
    logic._check_system(system)
    return logic.theory(system, x, i, cap)


def delta_i(logic, i, cap=DEFAULT_FORMULA_CAP):
    """delta_i as a function from depth-i trees to theories over stage-i formulas."""
    return lambda tree: logic.delta_theory(i, tree, cap)


# ---------------------------------------------------------------------------
# invariants of theories

def is_filter(theory):
    """T holds, and a conjunction holds iff both conjuncts do (where both are present)."""
    if theory.get(TOP) != 1:
        return False
    forms = list(theory)
    for f in forms:
        for g in forms:
            fg = f & g
            if fg in theory and theory[fg] != (theory[f] & theory[g]):
                return False
    return True


def is_downward_closed(theory):
    return all(theory[m] >= theory[n] for n in theory for m in theory if m <= n)
