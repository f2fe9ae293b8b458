"""Logical comparison objects, adequacy/expressiveness verdicts, and stage checks.

Comparison objects at depth ``k`` are computed from formula *extensions*
(the set of states satisfying a formula, as a bitmask), one modal layer at a
time. Distinct extensions per layer are at most ``2**|X|``, so depths of
``|X|**2 + 1`` stay cheap even where the number of formulas is astronomical.
Each extension keeps a representative formula, which becomes the witness.
The theory-based path (:func:`comparison_from_theories`) enumerates formulas
and is used for cross-checks at small depth.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fibres import BOOL, INF, LEVELS, PREDICATE, RELATION, FibreElement, fibre_leq, fibre_top, tabulate
from .fixpoint import approximant, gfp
from .liftings import StepOperator, lifting_for, mutant
from .logics import (DEFAULT_FORMULA_CAP, TOP, FinalSequence, HmFormula, LiftedStages, conj, diamond,
                     logic_for)
from .systems import bisimilarity_oracle

MODES = ("equality", "inclusion", "sup-distance", "totality")

MODE_LOGICS = {
    "sup-distance": ("words",),
    "totality": ("tau",),
    "inclusion": ("hm", "words"),
    "equality": ("hm", "words"),
}


class UnsupportedSelection(ValueError):
    pass


@dataclass(frozen=True)
class Pipeline:
    name: str
    lifting: str
    logic: str
    mode: str
    kinds: tuple


PIPELINES = {
    "sdw": Pipeline("sdw", "sdw", "words", "sup-distance", ("dfa",)),
    "divergence": Pipeline("divergence", "divergence", "tau", "totality", ("lts",)),
    "similarity": Pipeline("similarity", "simulation", "hm", "inclusion", ("lts",)),
    "bisimilarity": Pipeline("bisimilarity", "canonical", None, "equality", ("lts", "dfa")),
}


def pipeline_parts(name, system):
    """(lifting, logic, mode) of a named pipeline, resolved against a system."""
    if name not in PIPELINES:
        raise UnsupportedSelection(f"unknown pipeline {name!r}; choose from {', '.join(PIPELINES)}")
    p = PIPELINES[name]
    if system.kind not in p.kinds:
        raise UnsupportedSelection(f"pipeline {name} does not apply to a {system.kind}")
    if name == "divergence" and system.tau is None:
        raise UnsupportedSelection("the divergence pipeline needs a designated tau label")
    logic_name = p.logic or ("words" if system.kind == "dfa" else "hm")
    return lifting_for(p.lifting, system), logic_for(logic_name, system), p.mode


def default_depth(system):
    return system.size ** 2 + 1


# ---------------------------------------------------------------------------
# comparison objects

@dataclass
class ComparisonObject:
    value: FibreElement
    mode: str
    depth: int
    logic: object
    # extension bitmask -> (layer it first appears in, representative formula)
    extensions: dict = field(default_factory=dict, repr=False)

    def witness(self, x, y=None):
        """A minimal-depth formula separating x from y (inclusion sense), or refuting x."""
        best = None
        for mask, (layer, phi) in self.extensions.items():
            if self.mode == "totality":
                hit = not (mask >> x) & 1
            else:
                hit = (mask >> x) & 1 and not (mask >> y) & 1
            if hit:
                key = (layer, _formula_key(phi))
                if best is None or key < best[0]:
                    best = (key, phi)
        return None if best is None else best[1]

    def certificate(self, *idx):
        """A formula explaining why the entry at idx is as low as it is.

        Inclusion/equality: true at x, false at y (either way round for
        equality). Sup-distance: a word of length equal to the entry on which
        x and y disagree. Totality: a formula false at x.
        """
        if self.mode == "totality":
            return self.witness(idx[0])
        x, y = idx
        if self.mode == "sup-distance":
            level = self.value.at(x, y)
            hits = [(layer, w) for mask, (layer, w) in self.extensions.items()
                    if layer == level and ((mask >> x) & 1) != ((mask >> y) & 1)]
            return min(hits)[1] if hits else None
        phi = self.witness(x, y)
        if phi is None and self.mode == "equality":
            phi = self.witness(y, x)
        return phi


def _formula_key(phi):
    if isinstance(phi, HmFormula):
        return phi.sort_key
    if isinstance(phi, tuple):
        return (len(phi), phi)
    return phi


def _bits(mask, n):
    return [(mask >> x) & 1 for x in range(n)]


def _word_extensions(d, k, labels_pos):
    """Layers of word extensions: layer n holds ext(w) for |w| = n, up to n < k."""
    n = d.size
    accept = sum(1 << x for x in range(n) if d.output[x])
    seen = {}
    layer = {accept: ()}
    for depth in range(k):
        fresh = False
        for mask, w in layer.items():
            if mask not in seen:
                seen[mask] = (depth, w)
                fresh = True
        if not fresh and depth > 0:
            break
        nxt = {}
        for mask, w in sorted(layer.items(), key=lambda kv: kv[1]):
            for a, pos in labels_pos:
                pre = sum(1 << x for x in range(n) if (mask >> d.next[x][pos]) & 1)
                if pre not in nxt:
                    nxt[pre] = (a,) + w
        layer = nxt
    return seen


def _tau_extensions(l, k, t):
    n = l.size
    full = (1 << n) - 1
    seen = {}
    mask = full
    for depth in range(k):
        if mask in seen:
            break
        seen[mask] = (depth, depth)
        mask = sum(1 << x for x in range(n) if any((mask >> y) & 1 for y in l.succ[x][t]))
    return seen


def _hm_extensions(l, k, labels):
    """Extensions of formulas of modal depth <= k (the k-th formula stage)."""
    n = l.size
    full = (1 << n) - 1
    succ_masks = [[sum(1 << y for y in ys) for ys in l.succ[x]] for x in range(n)]
    seen = {full: (0, TOP)}
    current = {full: TOP}
    for depth in range(1, k + 1):
        gens = {}
        for mask, phi in sorted(current.items(), key=lambda kv: kv[1].sort_key):
            for pos, a in enumerate(labels):
                dia = sum(1 << x for x in range(n) if succ_masks[x][pos] & mask)
                cand = diamond(a, phi)
                if dia not in gens or cand.sort_key < gens[dia].sort_key:
                    gens[dia] = cand
        closure = {full: TOP}
        for g, gphi in sorted(gens.items(), key=lambda kv: kv[1].sort_key):
            for mask, phi in list(closure.items()):
                m = mask & g
                cand = conj(phi, gphi)
                if m not in closure or cand.sort_key < closure[m].sort_key:
                    closure[m] = cand
        for mask, phi in current.items():
            closure[mask] = phi
        for mask, phi in closure.items():
            if mask not in seen:
                seen[mask] = (depth, phi)
        if closure.keys() == current.keys():
            break
        current = closure
    return seen


def comparison(system, logic, mode, k):
    """th_k^*(Qbar L^k 0): the comparison object of the depth-k theories."""
    if mode not in MODE_LOGICS:
        raise UnsupportedSelection(f"unknown mode {mode!r}")
    if logic.name not in MODE_LOGICS[mode]:
        raise UnsupportedSelection(f"mode {mode} does not go with the {logic.name} logic")
    logic._check_system(system)
    n = system.size
    if logic.name == "words":
        exts = _word_extensions(system, k, list(zip(logic.labels, range(len(logic.labels)))))
    elif logic.name == "tau":
        exts = _tau_extensions(system, k, logic.t)
    else:
        exts = _hm_extensions(system, k, logic.labels)

    if mode == "totality":
        ok = (1 << n) - 1
        for mask in exts:
            ok &= mask
        value = tabulate(BOOL, PREDICATE, n, lambda x: bool((ok >> x) & 1))
    elif mode == "sup-distance":
        level = [[INF] * n for _ in range(n)]
        for mask, (layer, _) in exts.items():
            b = _bits(mask, n)
            for x in range(n):
                for y in range(n):
                    if b[x] != b[y] and layer < level[x][y]:
                        level[x][y] = layer
        value = tabulate(LEVELS, RELATION, n, lambda x, y: level[x][y])
    else:
        masks = list(exts)
        sym = mode == "equality"

        def related(x, y):
            for m in masks:
                bx, by = (m >> x) & 1, (m >> y) & 1
                if (bx and not by) or (sym and by and not bx):
                    return False
            return True

        value = tabulate(BOOL, RELATION, n, related)
    return ComparisonObject(value, mode, k, logic, exts)


def compare_theories(mode, th1, th2=None):
    """One entry of Qbar applied to two theories (dicts formula -> 0/1)."""
    if mode == "totality":
        return all(th1.values())
    if mode == "equality":
        return th1 == th2
    if mode == "inclusion":
        return all(v <= th2[phi] for phi, v in th1.items())
    if mode == "sup-distance":
        lengths = [len(w) for w, v in th1.items() if v != th2[w]]
        return min(lengths) if lengths else INF
    raise UnsupportedSelection(f"unknown mode {mode!r}")


def _mode_fibre(mode):
    if mode == "totality":
        return BOOL, PREDICATE
    return (LEVELS if mode == "sup-distance" else BOOL), RELATION


def comparison_from_theories(system, logic, mode, k, cap=DEFAULT_FORMULA_CAP):
    """The same object as :func:`comparison`, by enumerating every depth-k formula."""
    logic._check_system(system)
    ths = [logic.theory(system, x, k, cap) for x in range(system.size)]
    lattice, kind = _mode_fibre(mode)
    if kind == PREDICATE:
        return tabulate(lattice, kind, system.size, lambda x: compare_theories(mode, ths[x]))
    return tabulate(lattice, kind, system.size, lambda x, y: compare_theories(mode, ths[x], ths[y]))


# ---------------------------------------------------------------------------
# verdicts

@dataclass
class Witness:
    states: tuple               # (x,) or (x, y), by name
    predicate_value: object
    comparison_value: object
    formula: Optional[str] = None
    stage: Optional[int] = None  # first approximant at which the predicate drops below


@dataclass
class Verdict:
    pipeline: str
    depth: int
    steps: int
    stabilized: bool
    use_gfp: bool
    adequacy_holds: bool
    expressiveness_holds: bool
    adequacy_witness: Optional[Witness]
    expressiveness_witness: Optional[Witness]
    predicate: FibreElement
    comparison: FibreElement

    @property
    def holds(self):
        return self.adequacy_holds and self.expressiveness_holds

    @property
    def verified(self):
        """Both directions hold against the exact fixed point."""
        return self.holds and self.stabilized


def _entries(fe):
    n = fe.size
    if fe.kind == RELATION:
        return [((x, y), fe.values[x * n + y]) for x in range(n) for y in range(n)]
    return [((x,), fe.values[x]) for x in range(n)]


def _first_violation(lo, hi):
    """First entry where lo <= hi fails, in row-major order."""
    leq = lo.lattice.leq
    for (idx, a), (_, b) in zip(_entries(lo), _entries(hi)):
        if not leq(a, b):
            return idx
    return None


def _render_formula(logic, phi):
    return None if phi is None else logic.render(phi)


def check(system, lifting, logic, mode, k, use_gfp=True, pipeline=None):
    """Compare the coinductive predicate with the depth-k comparison object.

    Adequacy is ``predicate <= comparison``, expressiveness the converse.
    With ``use_gfp`` the predicate is the greatest fixed point; otherwise it
    is the k-th approximant (the finite-depth statement).
    """
    step = StepOperator(lifting, system)
    top = fibre_top(system.size, lifting.kind, lifting.lattice)
    result = gfp(step, top)
    stabilized = result.steps <= k
    pred = result.value if use_gfp else approximant(step, top, k, result)
    comp = comparison(system, logic, mode, k)
    if comp.value.fibre() != pred.fibre():
        raise UnsupportedSelection(f"lifting {lifting.name} and mode {mode} live in different fibres")
    names = system.states

    adequacy_witness = None
    bad = _first_violation(pred, comp.value)
    if bad is not None:
        phi = comp.certificate(*bad)
        adequacy_witness = Witness(tuple(names[i] for i in bad), pred.at(*bad), comp.value.at(*bad),
                                   _render_formula(logic, phi))

    expressiveness_witness = None
    bad = _first_violation(comp.value, pred)
    if bad is not None:
        stage = None
        leq = pred.lattice.leq
        for i, approx in enumerate(result.trace):
            if not leq(comp.value.at(*bad), approx.at(*bad)):
                stage = i
                break
        expressiveness_witness = Witness(tuple(names[i] for i in bad), pred.at(*bad), comp.value.at(*bad),
                                         stage=stage)

    return Verdict(pipeline or f"{lifting.name}/{logic.name}/{mode}", k, result.steps, stabilized, use_gfp,
                   adequacy_witness is None, expressiveness_witness is None,
                   adequacy_witness, expressiveness_witness, pred, comp.value)


def check_pipeline(system, name, k=None, use_gfp=True):
    lifting, logic, mode = pipeline_parts(name, system)
    return check(system, lifting, logic, mode, default_depth(system) if k is None else k, use_gfp, name)


def behavioural_equivalence_check(system, k=None, logic=None):
    """Logical equivalence (equality of theories) against partition-refinement bisimilarity."""
    k = default_depth(system) if k is None else k
    if logic is None:
        logic = logic_for("words" if system.kind == "dfa" else "hm", system)
    comp = comparison(system, logic, "equality", k)
    if system.kind == "lts":
        bisim = bisimilarity_oracle(system)
    else:
        from .systems import product_reachability
        bisim = tabulate(BOOL, RELATION, system.size,
                         lambda x, y: product_reachability(system, x, y) == INF)
    names = system.states
    adequacy_witness = expressiveness_witness = None
    bad = _first_violation(bisim, comp.value)
    if bad is not None:
        adequacy_witness = Witness(tuple(names[i] for i in bad), True, False,
                                   _render_formula(logic, comp.certificate(*bad)))
    bad = _first_violation(comp.value, bisim)
    if bad is not None:
        expressiveness_witness = Witness(tuple(names[i] for i in bad), False, True)
    return Verdict(f"equality/{logic.name}", k, 0, True, True,
                   adequacy_witness is None, expressiveness_witness is None,
                   adequacy_witness, expressiveness_witness, bisim, comp.value)


# ---------------------------------------------------------------------------
# one-step conditions on final-sequence stages

@dataclass
class StageReport:
    lifting: str
    logic: str
    mode: str
    stage: int
    cardinality: int
    relation: str               # "equal", "lifted<=comparison", "comparison<=lifted", "incomparable"
    adequacy_holds: bool        # Bbar^i 1 <= delta_i^*(Qbar L^i 0)
    expressiveness_holds: bool  # delta_i^*(Qbar L^i 0) <= Bbar^i 1
    adequacy_witness: Optional[dict] = None
    expressiveness_witness: Optional[dict] = None


def _theory_matrix(logic, fs, i, cap):
    forms = logic.formulas(i, cap)
    trees = fs.stage(i)
    mat = np.zeros((len(trees), len(forms)), dtype=bool)
    for r, t in enumerate(trees):
        for c, phi in enumerate(forms):
            mat[r, c] = bool(logic.delta(i, t, phi))
    return forms, mat


def stage_comparison(logic, mode, fs, i, cap=DEFAULT_FORMULA_CAP):
    """delta_i^*(Qbar L^i 0) as a fibre element over B^i 1, with the formula list and theory matrix."""
    forms, mat = _theory_matrix(logic, fs, i, cap)
    m = len(fs.stage(i))
    lattice, kind = _mode_fibre(mode)
    if mode == "totality":
        vals = tuple(bool(v) for v in mat.all(axis=1)) if forms else (True,) * m
        return FibreElement(lattice, kind, m, vals), forms, mat
    if mode in ("inclusion", "equality"):
        t = mat.astype(np.int32)
        # violations[a, b] = #formulas true at a and false at b
        viol = t @ (1 - t).T
        rel = viol == 0
        if mode == "equality":
            rel = rel & rel.T
        return FibreElement(lattice, kind, m, tuple(bool(v) for v in rel.reshape(-1))), forms, mat
    lengths = np.array([len(w) for w in forms], dtype=float)
    out = []
    for a in range(m):
        for b in range(m):
            diff = mat[a] != mat[b]
            out.append(int(lengths[diff].min()) if diff.any() else INF)
    return FibreElement(lattice, kind, m, tuple(out)), forms, mat


def _stage_witness(fs, logic, mode, i, forms, mat, idx, lifted, comp):
    trees = fs.stage(i)
    from .logics import render_tree
    w = {"trees": [render_tree(trees[j], logic.labels) for j in idx],
         "lifted": lifted.at(*idx), "comparison": comp.at(*idx)}
    if mode == "totality":
        bad = [c for c in range(len(forms)) if not mat[idx[0], c]]
    elif mode == "sup-distance":
        bad = [c for c in range(len(forms)) if mat[idx[0], c] != mat[idx[1], c]]
    else:
        a, b = idx
        bad = [c for c in range(len(forms)) if mat[a, c] and not mat[b, c]]
        if not bad and mode == "equality":
            bad = [c for c in range(len(forms)) if mat[b, c] and not mat[a, c]]
    if bad:
        w["formula"] = logic.render(min((forms[c] for c in bad), key=_formula_key))
    return w


def check_one_step_stage(kind, lifting, logic, mode, i, labels=None, mutation=None,
                         cap=10 ** 6, formula_cap=DEFAULT_FORMULA_CAP):
    """Compare Bbar^i 1 with delta_i^*(Qbar L^i 0) on the materialized stage B^i 1."""
    if mutation is not None:
        lifting = mutant(lifting, mutation)
    labels = tuple(labels if labels is not None else logic.labels)
    if lifting.functor != kind or logic.kind != kind:
        raise UnsupportedSelection(f"{lifting.name} / {logic.name} do not both apply to {kind}")
    fs = FinalSequence(kind, labels, i, cap)
    lifted = LiftedStages(lifting).table(fs, i)
    comp, forms, mat = stage_comparison(logic, mode, fs, i, formula_cap)
    if lifted.fibre() != comp.fibre():
        raise UnsupportedSelection(f"lifting {lifting.name} and mode {mode} live in different fibres")
    ade = _first_violation(lifted, comp)
    exp = _first_violation(comp, lifted)
    if ade is None and exp is None:
        rel = "equal"
    elif ade is None:
        rel = "lifted<=comparison"
    elif exp is None:
        rel = "comparison<=lifted"
    else:
        rel = "incomparable"
    return StageReport(
        lifting.name, logic.name, mode, i, len(fs.stage(i)), rel, ade is None, exp is None,
        None if ade is None else _stage_witness(fs, logic, mode, i, forms, mat, ade, lifted, comp),
        None if exp is None else _stage_witness(fs, logic, mode, i, forms, mat, exp, lifted, comp))


def stage_pipeline(name, kind, labels, i, tau=None, mutation=None, cap=10 ** 6):
    """check_one_step_stage for a named pipeline over an abstract alphabet."""
    from .liftings import CANONICAL_DFA, CANONICAL_LTS, SDW_DFA, SIMULATION_LTS, divergence_lifting
    from .logics import HmLogic, TauLogic, WordLogic
    labels = tuple(labels)
    if name == "sdw":
        parts = (SDW_DFA, WordLogic(labels), "sup-distance", "dfa")
    elif name == "divergence":
        tau = labels[0] if tau is None else tau
        parts = (divergence_lifting(labels.index(tau)), TauLogic(labels, tau), "totality", "lts")
    elif name == "similarity":
        parts = (SIMULATION_LTS, HmLogic(labels), "inclusion", "lts")
    elif name == "bisimilarity":
        if kind == "dfa":
            parts = (CANONICAL_DFA, WordLogic(labels), "equality", "dfa")
        else:
            parts = (CANONICAL_LTS, HmLogic(labels), "equality", "lts")
    else:
        raise UnsupportedSelection(f"unknown pipeline {name!r}")
    lifting, logic, mode, k = parts
    if kind is not None and kind != k:
        raise UnsupportedSelection(f"pipeline {name} does not apply to a {kind}")
    return check_one_step_stage(k, lifting, logic, mode, i, labels, mutation, cap)


# ---------------------------------------------------------------------------
# finite-stage lemmas

def lemma_theories(system, logic, i, cap=DEFAULT_FORMULA_CAP):
    """th_i = delta_i o gamma_i, pointwise over states and formulas. Returns the first mismatch."""
    from .logics import gammas
    g = gammas(system, i)
    for x in range(system.size):
        th = logic.theory(system, x, i, cap)
        dt = logic.delta_theory(i, g[x], cap)
        if th != dt:
            phi = next(p for p in th if th[p] != dt[p])
            return (system.states[x], logic.render(phi), th[phi], dt[phi])
    return None


def lemma_approximants(system, lifting, i):
    """(gamma_i)^*(Bbar^i 1) = (gamma^* o Bbar_X)^i(top). Returns (lhs, rhs)."""
    step = StepOperator(lifting, system)
    top = fibre_top(system.size, lifting.kind, lifting.lattice)
    return LiftedStages(lifting).along(system, i), approximant(step, top, i)
