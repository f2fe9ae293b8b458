"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 unsupported selection,
3 verdict or property failure.
"""

import argparse
import os
import sys
from fractions import Fraction

from . import checker
from .campaigns import CAMPAIGNS, DEFAULT_CAMPAIGNS, run_campaign
from .checker import UnsupportedSelection
from .fibres import LEVELS, PREDICATE, fibre_top
from .fixpoint import gfp
from .liftings import (CANONICAL_DFA, CANONICAL_LTS, MUTATIONS, SDW_DFA, SIMULATION_LTS, LawSizeError,
                       StepOperator, check_fibration, check_lax_extension, lifting_for, mutant)
from .logics import (FinalSequence, FormulaCapExceeded, FormulaSyntaxError, StageTooLarge, gammas,
                     logic_for, render_tree, HmLogic, TauLogic, WordLogic)
from .report import Report, render_value
from .systems import SystemParseError, SystemValidationError, dump_system, load_system

OK, INPUT_ERROR, UNSUPPORTED, FAILURE = 0, 1, 2, 3


class InputError(Exception):
    pass


def _load(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return load_system(data)


def _rational(text):
    try:
        c = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if not 0 < c < 1:
        raise argparse.ArgumentTypeError("the discount constant must lie strictly between 0 and 1")
    return c


def _labels(text):
    labels = tuple(t.strip() for t in text.split(",") if t.strip())
    if not labels:
        raise argparse.ArgumentTypeError("need at least one label")
    return labels


def _system_meta(rep, path, system):
    rep.add("system", os.path.basename(path))
    rep.add("kind", system.kind)
    rep.add("states", system.size)
    rep.add("labels", ", ".join(system.labels))


def _figure(args, panels, names, trace=None):
    if not args.figure:
        return None
    from .plotting import save_fibres
    return save_fibres(args.figure, panels, names, trace)


# ---------------------------------------------------------------------------
# commands

def cmd_compute(args, out):
    system = _load(args.system)
    try:
        lifting = lifting_for(args.lifting, system)
    except (ValueError, SystemValidationError) as e:
        raise UnsupportedSelection(str(e)) from None
    step = StepOperator(lifting, system)
    result = gfp(step, fibre_top(system.size, lifting.kind, lifting.lattice))
    rep = Report("compute")
    _system_meta(rep, args.system, system)
    rep.add("lifting", lifting.name)
    rep.add("steps", result.steps)
    if lifting.kind == PREDICATE:
        rep.add("members", ", ".join(system.states[x] for x in result.value.members()))
    rep.fibre("gfp", result.value, system.states, args.c)
    if args.trace:
        for i, approx in enumerate(result.trace):
            rep.fibre(f"approximant {i}", approx, system.states, args.c)
    fig = _figure(args, [(f"gfp ({lifting.name})", result.value)], system.states,
                  result.trace if args.trace else None)
    if fig:
        rep.add("figure", fig)
    out.write(rep.render(args.format))
    return OK


def _witness_row(label, w, c=None):
    row = [label, " ".join(w.states)]
    row.append(f"predicate={_value_text(w.predicate_value, c)}")
    row.append(f"comparison={_value_text(w.comparison_value, c)}")
    if w.formula is not None:
        row.append(f"formula={w.formula}")
    if w.stage is not None:
        row.append(f"separates-at-approximant={w.stage}")
    return row


def _value_text(v, c=None):
    if isinstance(v, bool):
        return "1" if v else "0"
    return render_value(LEVELS, v, c)


def _stage_check(args, out):
    pipeline = args.pipeline
    if args.system:
        system = _load(args.system)
        kind, labels, tau = system.kind, system.labels, system.tau
    else:
        kind = args.kind or checker.PIPELINES[pipeline].kinds[0]
        labels = args.labels or (("tau",) if pipeline == "divergence" else ("a",))
        tau = args.tau or (labels[0] if pipeline == "divergence" else None)
    if pipeline == "divergence" and tau is None:
        raise UnsupportedSelection("the divergence pipeline needs a designated tau label")
    report = checker.stage_pipeline(pipeline, kind, labels, args.stage, tau, args.mutation)
    rep = Report("check-stage")
    rep.add("pipeline", pipeline)
    rep.add("kind", kind)
    rep.add("labels", ", ".join(labels))
    rep.add("lifting", report.lifting)
    rep.add("logic", report.logic)
    rep.add("mode", report.mode)
    rep.add("stage", report.stage)
    rep.add("stage-size", report.cardinality)
    rep.add("relation", report.relation)
    rep.add("adequacy", "holds" if report.adequacy_holds else "fails")
    rep.add("expressiveness", "holds" if report.expressiveness_holds else "fails")
    rows = []
    for name, w in (("adequacy", report.adequacy_witness), ("expressiveness", report.expressiveness_witness)):
        if w:
            row = [name] + [f"t{i + 1}={t}" for i, t in enumerate(w["trees"])]
            row += [f"lifted={_value_text(w['lifted'], args.c)}", f"comparison={_value_text(w['comparison'], args.c)}"]
            if "formula" in w:
                row.append(f"formula={w['formula']}")
            rows.append(row)
    if rows:
        rep.section("witnesses", rows)
    out.write(rep.render(args.format))
    return OK if report.adequacy_holds and report.expressiveness_holds else FAILURE


def cmd_check(args, out):
    if args.stage is not None:
        return _stage_check(args, out)
    if not args.system:
        raise InputError("check needs a system file (or --stage for a one-step stage check)")
    system = _load(args.system)
    k = checker.default_depth(system) if args.depth is None else args.depth
    if k < 0:
        raise InputError("depth must be non-negative")
    v = checker.check_pipeline(system, args.pipeline, k)
    lifting, logic, mode = checker.pipeline_parts(args.pipeline, system)
    rep = Report("check")
    _system_meta(rep, args.system, system)
    rep.add("pipeline", args.pipeline)
    rep.add("lifting", lifting.name)
    rep.add("logic", logic.name)
    rep.add("mode", mode)
    rep.add("depth", k)
    rep.add("steps", v.steps)
    rep.add("stabilized", "yes" if v.stabilized else "no")
    rep.add("adequacy", "holds" if v.adequacy_holds else "fails")
    rep.add("expressiveness", "holds" if v.expressiveness_holds else "fails")
    if not v.stabilized:
        verdict = f"depth {k} is below stabilization (step {v.steps}); not verified"
    elif v.holds:
        verdict = f"HM theorem holds, depth {k}"
    else:
        verdict = f"HM theorem fails at depth {k}"
    rep.add("verdict", verdict)
    rows = []
    if v.adequacy_witness:
        rows.append(_witness_row("adequacy", v.adequacy_witness, args.c))
    if v.expressiveness_witness:
        rows.append(_witness_row("expressiveness", v.expressiveness_witness, args.c))
    if rows:
        rep.section("witnesses", rows)
    if args.trace:
        rep.fibre("predicate", v.predicate, system.states, args.c)
        rep.fibre("comparison", v.comparison, system.states, args.c)
    fig = _figure(args, [("predicate", v.predicate), (f"comparison, depth {k}", v.comparison)], system.states)
    if fig:
        rep.add("figure", fig)
    out.write(rep.render(args.format))
    return OK if v.verified else FAILURE


def cmd_fuzz(args, out):
    names = args.campaign or list(DEFAULT_CAMPAIGNS)
    for n in names:
        if n not in CAMPAIGNS:
            raise UnsupportedSelection(f"unknown campaign {n!r}; choose from {', '.join(CAMPAIGNS)}")
    rep = Report("fuzz")
    rep.add("seed", args.seed)
    rep.add("count", args.count)
    rep.add("max-states", args.max_states)
    rep.add("max-labels", args.max_labels)
    rows = [["campaign", "passed", "total", "status", "property"]]
    failures = []
    for n in names:
        r = run_campaign(n, args.count, args.seed, args.max_states, args.max_labels)
        rows.append([n, r.passed, r.total, "PASS" if r.ok else "FAIL", r.summary])
        if not r.ok:
            failures.append(r)
    rep.section("campaigns", rows)
    for r in failures:
        rep.section(f"first failure: {r.name}", [
            ["instance", r.first_index], ["mismatch", r.first_message], ["shrunk-mismatch", r.shrunk_message]])
        rep.section(f"shrunk system: {r.name}", [[line] for line in dump_system(r.shrunk).splitlines()])
    out.write(rep.render(args.format))
    return FAILURE if failures else OK


LAW_LIFTINGS = {
    "canonical-lts": CANONICAL_LTS,
    "simulation-lts": SIMULATION_LTS,
    "sdw-dfa": SDW_DFA,
    "canonical-dfa": CANONICAL_DFA,
}


def _law_lifting(name):
    base, _, mutation = name.partition("[")
    full = {"canonical": "canonical-lts", "simulation": "simulation-lts", "sdw": "sdw-dfa"}.get(base, base)
    if full not in LAW_LIFTINGS:
        raise UnsupportedSelection(f"unknown lifting {name!r}; choose from {', '.join(LAW_LIFTINGS)}")
    lifting = LAW_LIFTINGS[full]
    if mutation:
        mutation = mutation.rstrip("]")
        if mutation not in MUTATIONS:
            raise UnsupportedSelection(f"unknown mutation {mutation!r}")
        try:
            lifting = mutant(lifting, mutation)
        except ValueError as e:
            raise UnsupportedSelection(str(e)) from None
    return lifting


def cmd_laws(args, out):
    if args.max_size > 3 or args.max_labels > 2:
        raise UnsupportedSelection("law checks enumerate carriers of size <= 3 and at most 2 labels")
    if args.lifting:
        plan = [(_law_lifting(args.lifting), args.law or "both")]
    else:
        plan = [(CANONICAL_LTS, "lax"), (SIMULATION_LTS, "fibration"), (SDW_DFA, "fibration"),
                (CANONICAL_LTS, "fibration")]
    rep = Report("laws")
    rep.add("max-size", args.max_size)
    rep.add("max-labels", args.max_labels)
    rows = [["lifting", "labels", "law", "status", "instances"]]
    cexs = []
    failed = False
    for lifting, which in plan:
        for nl in range(1, args.max_labels + 1):
            reports = []
            if which in ("lax", "both") and lifting.lattice is not LEVELS:
                reports += check_lax_extension(lifting, args.max_size, nl)
            if which in ("fibration", "both"):
                reports.append(check_fibration(lifting, args.max_size, nl))
            for r in reports:
                rows.append([r.lifting, nl, r.law, "PASS" if r.ok else "FAIL", r.checked])
                if not r.ok:
                    failed = True
                    cexs.append([r.lifting, nl, r.law] + [f"{k}={v}" for k, v in r.counterexample.items()])
    rep.section("laws", rows)
    if cexs:
        rep.section("counterexamples", cexs)
    out.write(rep.render(args.format))
    return FAILURE if failed else OK


def _abstract_logic(name, labels, tau):
    if name == "words":
        return WordLogic(labels)
    if name == "tau":
        return TauLogic(labels, tau or labels[0])
    return HmLogic(labels)


def cmd_enumerate(args, out):
    rep = Report("enumerate")
    system = _load(args.system) if args.system else None
    if args.what == "formulas":
        if system:
            logic = logic_for(args.logic, system)
        else:
            logic = _abstract_logic(args.logic, args.labels or ("a",), args.tau)
        forms = logic.formulas(args.depth)
        rep.add("logic", logic.name)
        rep.add("labels", ", ".join(logic.labels))
        rep.add("depth", args.depth)
        rep.add("count", len(forms))
        rows = [["formula"] + (list(system.states) if system else [])]
        for phi in forms:
            row = [logic.render(phi)]
            if system:
                row += [logic.sat(system, x, phi) for x in range(system.size)]
            rows.append(row)
        rep.section("formulas", rows)
    else:
        kind = system.kind if system else (args.kind or "lts")
        labels = system.labels if system else (args.labels or ("a",))
        fs = FinalSequence(kind, labels, args.depth)
        rep.add("kind", kind)
        rep.add("labels", ", ".join(labels))
        rep.add("stage", args.depth)
        rep.add("count", len(fs.stage(args.depth)))
        rep.section("trees", [[j, render_tree(t, labels)] for j, t in enumerate(fs.stage(args.depth))])
        if args.depth > 0:
            conn = fs.connecting_map(args.depth)
            rep.section("connecting map", [[j, conn[j]] for j in range(len(conn))])
        if system:
            cone = fs.cone(system, args.depth)
            g = gammas(system, args.depth)
            rep.section("cone", [[system.states[x], cone[x], render_tree(g[x], labels)] for x in range(system.size)])
    out.write(rep.render(args.format))
    return OK


def cmd_eval(args, out):
    system = _load(args.system)
    name = args.logic or ("words" if system.kind == "dfa" else "hm")
    logic = logic_for(name, system)
    phi = logic.parse(args.formula)
    rep = Report("eval")
    _system_meta(rep, args.system, system)
    rep.add("logic", logic.name)
    rep.add("formula", logic.render(phi))
    rows = [["state", "sat"]] + [[system.states[x], logic.sat(system, x, phi)] for x in range(system.size)]
    rep.section("satisfaction", rows)
    out.write(rep.render(args.format))
    return OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    p = argparse.ArgumentParser(prog="hmlift", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("table", "structured"), default="table")
        sp.add_argument("--c", type=_rational, default=None, help="render distances for this rational c")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--figure", metavar="PATH", help="also write a figure to PATH (png, pdf, svg)")

    sp = sub.add_parser("compute", help="greatest fixed point of a lifting's step operator")
    sp.add_argument("system")
    sp.add_argument("--lifting", required=True)
    sp.add_argument("--trace", action="store_true")
    common(sp)

    sp = sub.add_parser("check", help="adequacy and expressiveness of a logic, or a one-step stage condition")
    sp.add_argument("system", nargs="?")
    sp.add_argument("--pipeline", required=True, choices=sorted(checker.PIPELINES))
    sp.add_argument("--depth", "-k", type=int)
    sp.add_argument("--stage", type=int)
    sp.add_argument("--kind", choices=("dfa", "lts"))
    sp.add_argument("--labels", type=_labels)
    sp.add_argument("--tau")
    sp.add_argument("--mutation", choices=sorted(MUTATIONS))
    sp.add_argument("--trace", action="store_true")
    common(sp)

    sp = sub.add_parser("fuzz", help="randomized oracle and logic campaigns")
    sp.add_argument("--count", type=int, default=200)
    sp.add_argument("--max-states", type=int, default=6)
    sp.add_argument("--max-labels", type=int, default=2)
    sp.add_argument("--campaign", action="append", choices=sorted(CAMPAIGNS))
    common(sp)

    sp = sub.add_parser("laws", help="lax-extension and fibration-map checks by enumeration")
    sp.add_argument("--lifting")
    sp.add_argument("--law", choices=("lax", "fibration", "both"))
    sp.add_argument("--max-size", type=int, default=3)
    sp.add_argument("--max-labels", type=int, default=2)
    common(sp)

    sp = sub.add_parser("enumerate", help="formulas of a logic or trees of a final-sequence stage")
    sp.add_argument("what", choices=("formulas", "stage"))
    sp.add_argument("--system", help="evaluate formulas on, or map states into the stage of, this system")
    sp.add_argument("--logic", choices=("words", "tau", "hm"), default="hm")
    sp.add_argument("--depth", "-k", type=int, default=1)
    sp.add_argument("--kind", choices=("dfa", "lts"))
    sp.add_argument("--labels", type=_labels)
    sp.add_argument("--tau")
    common(sp)

    sp = sub.add_parser("eval", help="evaluate one formula on every state")
    sp.add_argument("system")
    sp.add_argument("formula")
    sp.add_argument("--logic", choices=("words", "tau", "hm"))
    common(sp)
    return p


COMMANDS = {"compute": cmd_compute, "check": cmd_check, "fuzz": cmd_fuzz, "laws": cmd_laws,
            "enumerate": cmd_enumerate, "eval": cmd_eval}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else UNSUPPORTED
    try:
        return COMMANDS[args.command](args, out)
    except (InputError, SystemParseError, SystemValidationError, FormulaSyntaxError) as e:
        err.write(f"error: {e}\n")
        return INPUT_ERROR
    except (UnsupportedSelection, StageTooLarge, FormulaCapExceeded, LawSizeError) as e:
        err.write(f"unsupported: {e}\n")
        return UNSUPPORTED
    except ValueError as e:
        # incompatible logic/lifting/system combinations surface as plain ValueErrors
        err.write(f"unsupported: {e}\n")
        return UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
