import pytest
from hypothesis import given, settings, strategies as st

from hmlift.checker import (PIPELINES, UnsupportedSelection, behavioural_equivalence_check, check,
                            check_one_step_stage, check_pipeline, comparison, comparison_from_theories,
                            default_depth, lemma_approximants, lemma_theories, pipeline_parts, stage_pipeline)
from hmlift.fibres import BOOL, INF, LEVELS, PREDICATE, RELATION, fibre_leq, fibre_top
from hmlift.fixpoint import approximant, gfp
from hmlift.generate import random_dfa, random_lts
from hmlift.liftings import SIMULATION_LTS, StepOperator
from hmlift.logics import HmLogic, TauLogic, WordLogic, diamond, conj
from hmlift.systems import (bisimilarity_oracle, disjoint_union, parse_system, product_reachability_table,
                            simulation_oracle, tau_divergence_oracle)

# Mutually similar but not bisimilar: a b-loop, and a b-loop that may also
# step into a deadlock. Found by the fuzz shrinker.
LOOPS = parse_system("""lts
labels: b
states: s2, s4, s5
s2: b -> {s2}
s4: b -> {s4, s5}
s5:
""")


def test_sup_distance_example(dfa_b):
    v = comparison(dfa_b, WordLogic(dfa_b.labels), "sup-distance", 3).value
    assert v.at(0, 1) == 1 and v.at(0, 2) == 0
    assert all(v.at(x, x) == INF for x in range(3))


def test_inclusion_example_with_witness(lts_s):
    c = comparison(lts_s, HmLogic(lts_s.labels), "inclusion", 2)
    x, y = lts_s.index("x"), lts_s.index("y")
    assert c.value.at(y, x) and not c.value.at(x, y)
    assert str(c.certificate(x, y)) == "<a>(<b>T & <c>T)"


@pytest.mark.parametrize("mode,logic_name,system", [
    ("sup-distance", "words", "dfa_b"), ("equality", "words", "dfa_b"),
    ("inclusion", "hm", "lts_s"), ("equality", "hm", "lts_s"), ("totality", "tau", "lts_d")])
def test_depth_zero_is_top(mode, logic_name, system, request):
    s = request.getfixturevalue(system)
    logic = {"words": WordLogic, "hm": HmLogic}.get(logic_name, lambda labels: TauLogic(labels, "tau"))(s.labels)
    v = comparison(s, logic, mode, 0).value
    assert v == fibre_top(s.size, v.kind, v.lattice)


def test_incompatible_mode_rejected(lts_s, dfa_b):
    with pytest.raises(UnsupportedSelection):
        comparison(lts_s, HmLogic(lts_s.labels), "sup-distance", 2)
    with pytest.raises(ValueError):
        comparison(dfa_b, HmLogic(dfa_b.labels), "inclusion", 2)
    with pytest.raises(UnsupportedSelection):
        pipeline_parts("sdw", lts_s)
    with pytest.raises(UnsupportedSelection):
        pipeline_parts("divergence", lts_s)
    with pytest.raises(UnsupportedSelection):
        pipeline_parts("nope", lts_s)


def test_check_sdw(dfa_b):
    v = check_pipeline(dfa_b, "sdw", dfa_b.size ** 2 + 1)
    assert v.holds and v.stabilized
    assert v.comparison == v.predicate == product_reachability_table(dfa_b)


def test_check_divergence(lts_d):
    v = check_pipeline(lts_d, "divergence", lts_d.size + 1)
    assert v.holds and v.stabilized
    assert v.comparison.members() == [0, 1, 2]
    assert v.comparison == tau_divergence_oracle(lts_d)


def test_check_similarity(lts_s):
    v = check_pipeline(lts_s, "similarity")
    assert v.depth == 37
    assert v.holds and v.verified
    assert v.comparison == simulation_oracle(lts_s)


def test_check_below_stabilization_is_flagged(dfa_b):
    v = check_pipeline(dfa_b, "sdw", 1)
    assert not v.stabilized and not v.verified
    assert v.adequacy_holds and not v.expressiveness_holds
    w = v.expressiveness_witness
    assert w.states == ("p0", "p1") and w.stage == 2


def test_finite_depth_check_against_approximant(dfa_b):
    v = check_pipeline(dfa_b, "sdw", 1, use_gfp=False)
    assert v.holds


def test_check_rejects_mismatched_fibres(lts_s):
    with pytest.raises(UnsupportedSelection):
        check(lts_s, SIMULATION_LTS, TauLogic(lts_s.labels, "a"), "totality", 2)


def test_behavioural_equivalence_examples(lts_s):
    v = behavioural_equivalence_check(lts_s)
    assert v.holds
    assert not v.comparison.at(lts_s.index("x"), lts_s.index("y"))
    double = disjoint_union(lts_s, lts_s)
    v2 = behavioural_equivalence_check(double)
    assert v2.holds
    assert all(v2.comparison.at(x, x + lts_s.size) for x in range(lts_s.size))


def test_behavioural_equivalence_on_dfa(dfa_b):
    assert behavioural_equivalence_check(dfa_b).holds


def test_positive_hm_does_not_separate_mutual_similarity():
    v = behavioural_equivalence_check(LOOPS)
    assert v.adequacy_holds
    assert not v.expressiveness_holds
    assert v.expressiveness_witness.states == ("s2", "s4")
    sim = simulation_oracle(LOOPS)
    assert sim.at(0, 1) and sim.at(1, 0)
    assert not bisimilarity_oracle(LOOPS).at(0, 1)


# ---------------------------------------------------------------------------
# one-step stage conditions

def test_stage_sdw_equal_on_all_pairs():
    r = stage_pipeline("sdw", "dfa", ("a",), 2)
    assert r.cardinality == 4 and r.relation == "equal"


def test_stage_similarity_equal():
    for labels in (("a",), ("a", "b")):
        for i in range(3):
            assert stage_pipeline("similarity", "lts", labels, i).relation == "equal"


def test_stage_divergence_adequate_but_shifted():
    # The empty formula stage at 0 puts the tau-tower one step behind the
    # trees: <tau>^n T for n < i says nothing about step i.
    r = stage_pipeline("divergence", "lts", ("tau",), 2)
    assert r.adequacy_holds
    assert not r.expressiveness_holds
    assert r.expressiveness_witness["trees"] == ["[tau: {[tau: {}]}]"]
    assert stage_pipeline("divergence", "lts", ("tau",), 0).relation == "equal"


def test_stage_mutants_caught():
    r = stage_pipeline("similarity", "lts", ("a", "b"), 2, mutation="swap-forth")
    assert not r.expressiveness_holds and r.expressiveness_witness
    r = stage_pipeline("similarity", "lts", ("a",), 2, mutation="swap-forth")
    assert not r.expressiveness_holds
    r = stage_pipeline("sdw", "dfa", ("a", "b"), 2, mutation="drop-output")
    assert r.relation != "equal"
    assert r.adequacy_witness["formula"] in ("a", "b")


def test_stage_check_kind_mismatch():
    with pytest.raises(UnsupportedSelection):
        check_one_step_stage("dfa", SIMULATION_LTS, HmLogic(("a",)), "inclusion", 1)


# ---------------------------------------------------------------------------
# properties

seeds = st.integers(0, 10 ** 6)


def _system(kind, seed, max_states=6):
    if kind == "dfa":
        return random_dfa(seed, max_states)
    return random_lts(seed, max_states, tau=True)


def _pipelines(system):
    return [n for n, p in PIPELINES.items() if system.kind in p.kinds and (n != "divergence" or system.tau)]


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(["dfa", "lts"]))
def test_refinement_in_depth_and_sandwich(seed, kind):
    s = _system(kind, seed, 5)
    for name in _pipelines(s):
        lifting, logic, mode = pipeline_parts(name, s)
        step = StepOperator(lifting, s)
        top = fibre_top(s.size, lifting.kind, lifting.lattice)
        res = gfp(step, top)
        prev = None
        for k in range(6):
            c = comparison(s, logic, mode, k).value
            if prev is not None:
                assert fibre_leq(c, prev)
            assert fibre_leq(approximant(step, top, k, res), c)
            prev = c


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(["dfa", "lts"]))
def test_equal_to_gfp_at_stabilization(seed, kind):
    s = _system(kind, seed)
    for name in _pipelines(s):
        v = check_pipeline(s, name)
        assert v.stabilized
        if name == "bisimilarity" and kind == "lts":
            continue  # positive HM is coarser; see test_positive_hm_does_not_separate_mutual_similarity
        assert v.holds, (name, v)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(["dfa", "lts"]))
def test_witnesses_are_sound(seed, kind):
    s = _system(kind, seed, 5)
    k = default_depth(s)
    for name in _pipelines(s):
        _, logic, mode = pipeline_parts(name, s)
        comp = comparison(s, logic, mode, k)
        n = s.size
        if mode == "totality":
            for x in range(n):
                if not comp.value.at(x):
                    phi = comp.certificate(x)
                    assert phi < k and logic.sat(s, x, phi) == 0
            continue
        for x in range(n):
            for y in range(n):
                val = comp.value.at(x, y)
                if val is True or val == INF:
                    continue
                phi = comp.certificate(x, y)
                sx, sy = logic.sat(s, x, phi), logic.sat(s, y, phi)
                if mode == "sup-distance":
                    assert len(phi) == val and sx != sy
                elif mode == "inclusion":
                    assert sx == 1 and sy == 0
                    assert phi.depth <= k
                else:
                    assert sx != sy


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(["dfa", "lts"]))
def test_extension_path_matches_theory_path(seed, kind):
    s = _system(kind, seed, 4)
    for name in _pipelines(s):
        _, logic, mode = pipeline_parts(name, s)
        top = 2 if logic.name == "hm" and len(s.labels) > 1 else 4
        for k in range(top):
            assert comparison(s, logic, mode, k).value == comparison_from_theories(s, logic, mode, k)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(["dfa", "lts"]))
def test_lemmas_on_random_systems(seed, kind):
    s = _system(kind, seed, 4)
    for name in _pipelines(s):
        lifting, logic, _ = pipeline_parts(name, s)
        for i in range(4):
            if logic.name != "hm" or len(s.labels) == 1 or i <= 2:
                assert lemma_theories(s, logic, i) is None
            lhs, rhs = lemma_approximants(s, lifting, i)
            assert lhs == rhs
