"""Seeded random systems and failure shrinking for property campaigns."""

import random

from .systems import Dfa, Lts

LABELS = ("a", "b", "c", "d")


def _rng(seed):
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_dfa(seed, max_states=6, max_labels=2):
    rng = _rng(seed)
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_labels)
    output = tuple(rng.randint(0, 1) for _ in range(n))
    nxt = tuple(tuple(rng.randrange(n) for _ in range(k)) for _ in range(n))
    return Dfa(tuple(f"q{i}" for i in range(n)), LABELS[:k], output, nxt)


def random_lts(seed, max_states=6, max_labels=2, tau=False):
    """A random LTS; with ``tau`` the first label is named and designated ``tau``."""
    rng = _rng(seed)
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_labels)
    labels = LABELS[:k]
    if tau:
        labels = ("tau",) + labels[:k - 1]
    density = rng.choice((0.1, 0.2, 0.3, 0.5))
    succ = tuple(
        tuple(tuple(y for y in range(n) if rng.random() < density) for _ in range(k))
        for _ in range(n))
    return Lts(tuple(f"s{i}" for i in range(n)), labels, succ, "tau" if tau else None)


def random_system(kind, seed, max_states=6, max_labels=2, tau=False):
    if kind == "dfa":
        return random_dfa(seed, max_states, max_labels)
    return random_lts(seed, max_states, max_labels, tau)


# ---------------------------------------------------------------------------
# shrinking

def _drop_state(s, r):
    keep = [x for x in range(s.size) if x != r]
    if not keep:
        return None
    pos = {x: i for i, x in enumerate(keep)}
    states = tuple(s.states[x] for x in keep)
    if s.kind == "dfa":
        # transitions into the removed state are redirected to the first survivor
        nxt = tuple(tuple(pos.get(y, 0) for y in s.next[x]) for x in keep)
        return Dfa(states, s.labels, tuple(s.output[x] for x in keep), nxt)
    succ = tuple(tuple(tuple(pos[y] for y in ys if y != r) for ys in s.succ[x]) for x in keep)
    return Lts(states, s.labels, succ, s.tau)


def _drop_label(s, a):
    if len(s.labels) == 1:
        return None
    labels = s.labels[:a] + s.labels[a + 1:]
    if s.kind == "dfa":
        return Dfa(s.states, labels, s.output, tuple(row[:a] + row[a + 1:] for row in s.next))
    if s.labels[a] == s.tau:
        return None
    return Lts(s.states, labels, tuple(row[:a] + row[a + 1:] for row in s.succ), s.tau)


def _transition_variants(s):
    if s.kind == "dfa":
        for x in range(s.size):
            for a, y in enumerate(s.next[x]):
                if y != 0:
                    row = list(s.next[x])
                    row[a] = 0
                    nxt = s.next[:x] + (tuple(row),) + s.next[x + 1:]
                    yield Dfa(s.states, s.labels, s.output, nxt)
        return
    for x in range(s.size):
        for a, ys in enumerate(s.succ[x]):
            for y in ys:
                row = list(s.succ[x])
                row[a] = tuple(v for v in ys if v != y)
                succ = s.succ[:x] + (tuple(row),) + s.succ[x + 1:]
                yield Lts(s.states, s.labels, succ, s.tau)


def _candidates(s):
    for r in range(s.size):
        c = _drop_state(s, r)
        if c is not None:
            yield c
    yield from _transition_variants(s)
    for a in range(len(s.labels)):
        c = _drop_label(s, a)
        if c is not None:
            yield c


def shrink(system, fails, max_rounds=1000):
    """Greedily simplify ``system`` while ``fails`` keeps returning True.

    States go first, then transitions, then labels; each accepted candidate
    restarts the search from the smaller system.
    """
    current = system
    for _ in range(max_rounds):
        for cand in _candidates(current):
            try:
                still = fails(cand)
            except Exception:
                still = False
            if still:
                current = cand
                break
        else:
            return current
    return current
