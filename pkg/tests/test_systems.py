import pytest
from hypothesis import given, settings, strategies as st

from hmlift.fibres import INF
from hmlift.generate import random_dfa, random_lts
from hmlift.systems import (Dfa, Lts, SystemParseError, SystemValidationError, bisimilarity_oracle,
                            disjoint_union, dump_system, load_system, parse_system, product_reachability,
                            simulation_oracle, tau_divergence_oracle)

import oracles


def test_load_dfa_a(dfa_a):
    assert isinstance(dfa_a, Dfa)
    assert dfa_a.size == 2
    assert dfa_a.output == (0, 1)
    assert dfa_a.next == ((1,), (1,))


def test_load_accepts_bytes():
    d = load_system(b"dfa\nlabels: a\nstates: q\nq: 1; a -> q\n")
    assert d.output == (1,)


def test_round_trip(dfa_b, lts_d, lts_s):
    for s in (dfa_b, lts_d, lts_s):
        assert parse_system(dump_system(s)) == s


def test_undeclared_state_rejected():
    with pytest.raises(SystemValidationError, match="s9"):
        parse_system("lts\nlabels: a\nstates: s0\ns0: a -> {s9}\n")


def test_empty_alphabet_rejected():
    with pytest.raises(SystemValidationError):
        parse_system("lts\nlabels:\nstates: s0\n")


def test_unbounded_alphabet_rejected():
    with pytest.raises((SystemParseError, SystemValidationError)):
        parse_system("lts\nlabels: a, ...\nstates: s0\n")


def test_dfa_needs_every_label():
    with pytest.raises(SystemValidationError):
        parse_system("dfa\nlabels: a, b\nstates: q\nq: 0; a -> q\n")


def test_parse_error_has_position():
    with pytest.raises(SystemParseError) as exc:
        parse_system("dfa\nlabels: a\nstates: q\nq: 0; a => q\n")
    assert exc.value.line == 4


def test_unknown_header():
    with pytest.raises(SystemParseError):
        parse_system("nfa\nlabels: a\n")


def test_tau_must_be_a_label():
    with pytest.raises(SystemValidationError):
        parse_system("lts\nlabels: a\ntau = t\nstates: s\n")


def test_successor_sets_canonical():
    l = parse_system("lts\nlabels: a\nstates: s0, s1\ns0: a -> {s1, s0, s1}\n")
    assert l.succ[0][0] == (0, 1)


# ---------------------------------------------------------------------------
# oracles on the worked examples

def test_product_reachability_examples(dfa_a, dfa_b):
    assert product_reachability(dfa_a, 0, 1) == 0
    assert product_reachability(dfa_b, 0, 1) == 1
    for x in range(dfa_b.size):
        assert product_reachability(dfa_b, x, x) == INF


def test_divergence_oracle_examples(lts_d):
    assert tau_divergence_oracle(lts_d).members() == [0, 1, 2]
    loop = parse_system("lts\nlabels: tau\ntau = tau\nstates: s\ns: tau -> {s}\n")
    assert tau_divergence_oracle(loop).members() == [0]
    free = parse_system("lts\nlabels: a, tau\ntau = tau\nstates: s, t\ns: a -> {s, t}\n")
    assert tau_divergence_oracle(free).members() == []


def test_divergence_oracle_needs_tau(lts_s):
    with pytest.raises(SystemValidationError):
        tau_divergence_oracle(lts_s)


def test_simulation_oracle_examples(lts_s):
    one = parse_system("lts\nlabels: a\nstates: s\n")
    assert simulation_oracle(one).pairs() == [(0, 0)]
    sim = simulation_oracle(lts_s)
    x, y, z = (lts_s.index(s) for s in "xyz")
    assert sim.at(y, x) and not sim.at(x, y)
    for w in range(lts_s.size):
        assert sim.at(z, w)


def test_simulation_oracle_matches_brute_force(lts_s):
    sim = simulation_oracle(lts_s)
    # frozen from the naive fixpoint in tests/oracles run on this file
    expected = {("y", "x"), ("y1", "x1"), ("y2", "x1"), ("z", "x"), ("z", "x1"), ("z", "y"), ("z", "y1"),
                ("z", "y2")}
    got = {(lts_s.states[a], lts_s.states[b]) for a, b in sim.pairs() if a != b}
    assert got == expected


def test_bisimilarity_oracle_examples(lts_s):
    two = parse_system("lts\nlabels: a\nstates: s, t\n")
    assert bisimilarity_oracle(two).at(0, 1)
    assert not bisimilarity_oracle(lts_s).at(lts_s.index("x"), lts_s.index("y"))
    double = disjoint_union(lts_s, lts_s)
    b = bisimilarity_oracle(double)
    assert all(b.at(x, x + lts_s.size) for x in range(lts_s.size))


# ---------------------------------------------------------------------------
# properties on random systems

seeds = st.integers(0, 10 ** 6)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_product_reachability_symmetric_and_brute_force(seed):
    d = random_dfa(seed, max_states=5)
    for x in range(d.size):
        for y in range(d.size):
            v = product_reachability(d, x, y)
            assert v == product_reachability(d, y, x)
            assert (v == 0) == (d.output[x] != d.output[y])
            # within one n-state automaton a distinguishing word shorter than n exists
            assert v == oracles.word_distance(d, x, y, d.size)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_simulation_is_preorder_containing_bisimilarity(seed):
    l = random_lts(seed, max_states=5)
    sim = simulation_oracle(l)
    bis = bisimilarity_oracle(l)
    n = l.size
    for x in range(n):
        assert sim.at(x, x) and bis.at(x, x)
        for y in range(n):
            assert bis.at(x, y) == bis.at(y, x)
            if bis.at(x, y):
                assert sim.at(x, y) and sim.at(y, x)
            for z in range(n):
                if sim.at(x, y) and sim.at(y, z):
                    assert sim.at(x, z)
                if bis.at(x, y) and bis.at(y, z):
                    assert bis.at(x, z)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_simulation_oracle_against_exhaustive_search(seed):
    l = random_lts(seed, max_states=3)
    assert set(simulation_oracle(l).pairs()) == oracles.greatest_simulation(l)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_divergence_closure_rule(seed):
    l = random_lts(seed, tau=True)
    div = tau_divergence_oracle(l)
    t = l.tau_index
    for x in range(l.size):
        assert div.at(x) == any(div.at(y) for y in l.succ[x][t])
        assert div.at(x) == oracles.diverges(l, x, l.size + 1)
