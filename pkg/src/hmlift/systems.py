"""Finite coalgebras: deterministic automata and image-finite LTSs.

Also home to the classical graph algorithms used as oracles (product BFS,
tau-cycle detection, removal-based simulation, partition refinement). None of
them goes through the lifting/fixpoint machinery.

System file format::

    # comments start with '#'
    dfa
    labels: a, b
    states: q0, q1
    q0: 0; a -> q1; b -> q0
    q1: 1; a -> q1; b -> q1

    lts
    labels: a, tau
    tau = tau
    states: s0, s1
    s0: a -> {s1}; tau -> {s0, s1}
    s1:

Every DFA state needs a line giving its output and one target per label.
LTS state lines may be omitted; absent labels mean no successors.
"""

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .fibres import BOOL, INF, PREDICATE, RELATION, FibreElement, tabulate


class SystemParseError(ValueError):
    def __init__(self, line, col, msg):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {msg}")


class SystemValidationError(ValueError):
    pass


def _check_names(what, names):
    seen = set()
    for n in names:
        if not isinstance(n, str) or not n:
            raise SystemValidationError(f"{what} names must be nonempty strings, got {n!r}")
        if n in seen:
            raise SystemValidationError(f"duplicate {what} {n!r}")
        seen.add(n)


@dataclass(frozen=True)
class Dfa:
    states: tuple
    labels: tuple
    output: tuple          # output[x] in {0, 1}
    next: tuple            # next[x][a] is a state index
    kind: str = field(default="dfa", init=False)

    def __post_init__(self):
        _check_names("state", self.states)
        _check_names("label", self.labels)
        if not self.labels:
            raise SystemValidationError("alphabet must be nonempty")
        n = len(self.states)
        if len(self.output) != n or len(self.next) != n:
            raise SystemValidationError("output/transition tables do not match the state list")
        for x, (o, row) in enumerate(zip(self.output, self.next)):
            if o not in (0, 1):
                raise SystemValidationError(f"state {self.states[x]!r}: output must be 0 or 1")
            if len(row) != len(self.labels):
                raise SystemValidationError(f"state {self.states[x]!r}: needs one target per label")
            for a, y in enumerate(row):
                if not 0 <= y < n:
                    raise SystemValidationError(f"state {self.states[x]!r}, label {self.labels[a]!r}: target out of range")

    @property
    def size(self):
        return len(self.states)

    def gamma(self, x):
        return (self.output[x], self.next[x])

    def index(self, name):
        try:
            return self.states.index(name)
        except ValueError:
            raise SystemValidationError(f"unknown state {name!r}") from None

    def label_index(self, name):
        try:
            return self.labels.index(name)
        except ValueError:
            raise SystemValidationError(f"unknown label {name!r}") from None


@dataclass(frozen=True)
class Lts:
    states: tuple
    labels: tuple
    succ: tuple            # succ[x][a] is a sorted tuple of state indices
    tau: Optional[str] = None
    kind: str = field(default="lts", init=False)

    def __post_init__(self):
        _check_names("state", self.states)
        _check_names("label", self.labels)
        if not self.labels:
            raise SystemValidationError("alphabet must be nonempty")
        if self.tau is not None and self.tau not in self.labels:
            raise SystemValidationError(f"tau label {self.tau!r} is not declared")
        n = len(self.states)
        if len(self.succ) != n:
            raise SystemValidationError("successor table does not match the state list")
        canon = []
        for x, row in enumerate(self.succ):
            if len(row) != len(self.labels):
                raise SystemValidationError(f"state {self.states[x]!r}: needs one successor set per label")
            for ys in row:
                for y in ys:
                    if not 0 <= y < n:
                        raise SystemValidationError(f"state {self.states[x]!r}: successor out of range")
            canon.append(tuple(tuple(sorted(set(ys))) for ys in row))
        object.__setattr__(self, "succ", tuple(canon))

    @property
    def size(self):
        return len(self.states)

    @property
    def tau_index(self):
        if self.tau is None:
            raise SystemValidationError("no tau label designated")
        return self.labels.index(self.tau)

    def gamma(self, x):
        return tuple(frozenset(ys) for ys in self.succ[x])

    def index(self, name):
        try:
            return self.states.index(name)
        except ValueError:
            raise SystemValidationError(f"unknown state {name!r}") from None

    def label_index(self, name):
        try:
            return self.labels.index(name)
        except ValueError:
            raise SystemValidationError(f"unknown label {name!r}") from None

    def predecessors(self):
        """pred[y][a] = states x with x -a-> y."""
        pred = [[[] for _ in self.labels] for _ in self.states]
        for x, row in enumerate(self.succ):
            for a, ys in enumerate(row):
                for y in ys:
                    pred[y][a].append(x)
        return pred


def disjoint_union(l1, l2, suffix="'"):
    """Two LTSs side by side; states of ``l2`` get ``suffix`` appended."""
    if l1.labels != l2.labels or l1.tau != l2.tau:
        raise SystemValidationError("disjoint union needs identical label sets")
    n = l1.size
    states = l1.states + tuple(s + suffix for s in l2.states)
    succ = l1.succ + tuple(tuple(tuple(y + n for y in ys) for ys in row) for row in l2.succ)
    return Lts(states, l1.labels, succ, l1.tau)


# ---------------------------------------------------------------------------
# parsing

_NAME = r"[A-Za-z0-9_.'\-]+"
_NAME_RE = re.compile(rf"^{_NAME}$")


def _names(text, lineno, col):
    items = [t.strip() for t in text.split(",")]
    if items == [""]:
        return []
    for t in items:
        if t == "...":
            raise SystemValidationError(f"line {lineno}: alphabets and state sets must be finite")
        if not _NAME_RE.match(t):
            raise SystemParseError(lineno, col, f"bad name {t!r}")
    return items


def parse_system(text):
    """Parse the text format above into a validated :class:`Dfa` or :class:`Lts`."""
    lines = []
    for i, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            lines.append((i, body))
    if not lines:
        raise SystemParseError(1, 1, "empty document")

    lineno, header = lines[0]
    kind = header.strip().lower()
    if kind not in ("dfa", "lts"):
        raise SystemParseError(lineno, 1, f"expected header 'dfa' or 'lts', got {header.strip()!r}")

    labels = states = None
    tau = None
    bodies = {}
    for lineno, body in lines[1:]:
        stripped = body.strip()
        col = len(body) - len(body.lstrip()) + 1
        m = re.match(r"^(labels|states)\s*:(.*)$", stripped)
        if m:
            names = _names(m.group(2), lineno, col)
            if m.group(1) == "labels":
                labels = names
            else:
                states = names
            continue
        m = re.match(rf"^tau\s*=\s*({_NAME})$", stripped)
        if m:
            if kind != "lts":
                raise SystemParseError(lineno, col, "tau may only be designated for an lts")
            tau = m.group(1)
            continue
        m = re.match(rf"^({_NAME})\s*:(.*)$", stripped)
        if not m:
            raise SystemParseError(lineno, col, f"cannot parse {stripped!r}")
        if states is None or labels is None:
            raise SystemParseError(lineno, col, "labels and states must be declared before transitions")
        name = m.group(1)
        if name not in states:
            raise SystemValidationError(f"line {lineno}: undeclared state {name!r}")
        if name in bodies:
            raise SystemValidationError(f"line {lineno}: state {name!r} described twice")
        bodies[name] = (lineno, m.group(2))

    if labels is None:
        raise SystemParseError(lines[0][0], 1, "missing 'labels:' line")
    if states is None:
        raise SystemParseError(lines[0][0], 1, "missing 'states:' line")
    if not labels:
        raise SystemValidationError("alphabet must be nonempty")

    if kind == "dfa":
        return _build_dfa(states, labels, bodies)
    return _build_lts(states, labels, tau, bodies)


def _build_dfa(states, labels, bodies):
    output, nxt = [], []
    for s in states:
        if s not in bodies:
            raise SystemValidationError(f"dfa state {s!r} has no transition line")
        lineno, rest = bodies[s]
        parts = [p.strip() for p in rest.split(";")]
        if parts[0] not in ("0", "1"):
            raise SystemParseError(lineno, 1, f"state {s!r}: output must be 0 or 1, got {parts[0]!r}")
        targets = {}
        for p in parts[1:]:
            if not p:
                continue
            m = re.match(rf"^({_NAME})\s*->\s*({_NAME})$", p)
            if not m:
                raise SystemParseError(lineno, 1, f"state {s!r}: cannot parse transition {p!r}")
            a, t = m.groups()
            if a not in labels:
                raise SystemValidationError(f"line {lineno}: unknown label {a!r}")
            if t not in states:
                raise SystemValidationError(f"line {lineno}: unknown state {t!r}")
            if a in targets:
                raise SystemValidationError(f"line {lineno}: label {a!r} given twice for {s!r}")
            targets[a] = states.index(t)
        missing = [a for a in labels if a not in targets]
        if missing:
            raise SystemValidationError(f"line {lineno}: state {s!r} lacks a transition on {missing[0]!r}")
        output.append(int(parts[0]))
        nxt.append(tuple(targets[a] for a in labels))
    return Dfa(tuple(states), tuple(labels), tuple(output), tuple(nxt))


def _build_lts(states, labels, tau, bodies):
    if tau is not None and tau not in labels:
        raise SystemValidationError(f"tau label {tau!r} is not declared")
    succ = []
    for s in states:
        row = {a: set() for a in labels}
        if s in bodies:
            lineno, rest = bodies[s]
            for p in (q.strip() for q in rest.split(";")):
                if not p:
                    continue
                m = re.match(rf"^({_NAME})\s*->\s*\{{(.*)\}}$", p)
                if not m:
                    raise SystemParseError(lineno, 1, f"state {s!r}: cannot parse {p!r}")
                a = m.group(1)
                if a not in labels:
                    raise SystemValidationError(f"line {lineno}: unknown label {a!r}")
                for t in _names(m.group(2), lineno, 1):
                    if t not in states:
                        raise SystemValidationError(f"line {lineno}: unknown state {t!r}")
                    row[a].add(states.index(t))
        succ.append(tuple(tuple(sorted(row[a])) for a in labels))
    return Lts(tuple(states), tuple(labels), tuple(succ), tau)


def load_system(data):
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise SystemParseError(1, e.start + 1, "input is not valid UTF-8") from None
    return parse_system(data)


def dump_system(system):
    out = [system.kind, "labels: " + ", ".join(system.labels)]
    if system.kind == "lts" and system.tau is not None:
        out.append(f"tau = {system.tau}")
    out.append("states: " + ", ".join(system.states))
    for x, s in enumerate(system.states):
        if system.kind == "dfa":
            trans = "; ".join(f"{a} -> {system.states[y]}" for a, y in zip(system.labels, system.next[x]))
            out.append(f"{s}: {system.output[x]}; {trans}")
        else:
            trans = "; ".join(
                f"{a} -> {{{', '.join(system.states[y] for y in ys)}}}"
                for a, ys in zip(system.labels, system.succ[x]) if ys)
            out.append(f"{s}: {trans}".rstrip())
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# oracles

def product_reachability(d, x, y):
    """Length of a shortest word on which ``x`` and ``y`` disagree, else ``INF``."""
    seen = {(x, y)}
    frontier = [(x, y)]
    depth = 0
    while frontier:
        nxt = []
        for u, v in frontier:
            if d.output[u] != d.output[v]:
                return depth
            for a in range(len(d.labels)):
                p = (d.next[u][a], d.next[v][a])
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
        depth += 1
    return INF


def product_reachability_table(d):
    from .fibres import LEVELS
    return tabulate(LEVELS, RELATION, d.size, lambda x, y: product_reachability(d, x, y))


def tau_divergence_oracle(l):
    """States from which an infinite tau-path starts (tau-cycle reachable by tau-steps)."""
    t = l.tau_index
    n = l.size
    on_cycle = set()
    for x in range(n):
        stack = list(l.succ[x][t])
        seen = set()
        while stack:
            u = stack.pop()
            if u == x:
                on_cycle.add(x)
                break
            if u in seen:
                continue
            seen.add(u)
            stack.extend(l.succ[u][t])
    pred = l.predecessors()
    diverging = set(on_cycle)
    queue = deque(on_cycle)
    while queue:
        u = queue.popleft()
        for p in pred[u][t]:
            if p not in diverging:
                diverging.add(p)
                queue.append(p)
    return tabulate(BOOL, PREDICATE, n, lambda x: x in diverging)


def _simulated_by(l, rel, x, y):
    for a, xs in enumerate(l.succ[x]):
        ys = l.succ[y][a]
        for u in xs:
            if not any((u, v) in rel for v in ys):
                return False
    return True


def simulation_oracle(l):
    """Similarity by deleting violating pairs from the full relation, with a worklist."""
    n = l.size
    rel = {(x, y) for x in range(n) for y in range(n)}
    pred = l.predecessors()
    work = deque(sorted(rel))
    queued = set(rel)
    while work:
        pair = work.popleft()
        queued.discard(pair)
        if pair not in rel:
            continue
        x, y = pair
        if _simulated_by(l, rel, x, y):
            continue
        rel.discard(pair)
        for a in range(len(l.labels)):
            for px in pred[x][a]:
                for py in pred[y][a]:
                    q = (px, py)
                    if q in rel and q not in queued:
                        queued.add(q)
                        work.append(q)
    return tabulate(BOOL, RELATION, n, lambda x, y: (x, y) in rel)


def bisimilarity_oracle(l):
    """Coarsest stable partition, by signature refinement, as an equivalence relation."""
    n = l.size
    block = [0] * n
    count = 1 if n else 0
    while True:
        sigs = [(block[x], tuple(tuple(sorted({block[y] for y in ys})) for ys in l.succ[x])) for x in range(n)]
        ids = {}
        new = [ids.setdefault(s, len(ids)) for s in sigs]
        if len(ids) == count:
            break
        block, count = new, len(ids)
    return tabulate(BOOL, RELATION, n, lambda x, y: block[x] == block[y])
