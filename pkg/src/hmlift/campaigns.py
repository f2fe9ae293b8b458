"""Randomized property campaigns: fixpoint engine vs. oracles, logic vs. fixpoint."""

import random
from dataclasses import dataclass
from typing import Callable, Optional

from .checker import comparison, default_depth
from .fibres import fibre_top
from .fixpoint import gfp
from .generate import random_system, shrink
from .liftings import CANONICAL_DFA, CANONICAL_LTS, SDW_DFA, SIMULATION_LTS, StepOperator, divergence_lifting
from .logics import HmLogic, TauLogic, WordLogic
from .systems import (bisimilarity_oracle, product_reachability_table, simulation_oracle,
                      tau_divergence_oracle)


def _gfp_value(lifting, system):
    top = fibre_top(system.size, lifting.kind, lifting.lattice)
    return gfp(StepOperator(lifting, system), top, keep_trace=False).value


def _diff(system, expected, got):
    """Name the first entry where two fibre elements differ, or None."""
    if expected == got:
        return None
    n = system.size
    lat = expected.lattice
    for i, (e, g) in enumerate(zip(expected.values, got.values)):
        if e != g:
            if expected.kind == "relation":
                where = f"({system.states[i // n]}, {system.states[i % n]})"
            else:
                where = system.states[i]
            return f"{where}: expected {lat.render(e)}, got {lat.render(g)}"
    return "fibres differ"


def sdw_oracle(d):
    return _diff(d, product_reachability_table(d), _gfp_value(SDW_DFA, d))


def simulation_oracle_check(l):
    return _diff(l, simulation_oracle(l), _gfp_value(SIMULATION_LTS, l))


def divergence_oracle(l):
    return _diff(l, tau_divergence_oracle(l), _gfp_value(divergence_lifting(l.tau_index), l))


def bisimulation_oracle(l):
    return _diff(l, bisimilarity_oracle(l), _gfp_value(CANONICAL_LTS, l))


def hm_sdw(d):
    comp = comparison(d, WordLogic(d.labels), "sup-distance", default_depth(d))
    return _diff(d, _gfp_value(SDW_DFA, d), comp.value)


def hm_divergence(l):
    comp = comparison(l, TauLogic(l.labels, l.tau), "totality", default_depth(l))
    return _diff(l, _gfp_value(divergence_lifting(l.tau_index), l), comp.value)


def hm_similarity(l):
    comp = comparison(l, HmLogic(l.labels), "inclusion", default_depth(l))
    return _diff(l, _gfp_value(SIMULATION_LTS, l), comp.value)


def hm_dfa_equality(d):
    comp = comparison(d, WordLogic(d.labels), "equality", default_depth(d))
    return _diff(d, _gfp_value(CANONICAL_DFA, d), comp.value)


def hm_bisimilarity(l):
    comp = comparison(l, HmLogic(l.labels), "equality", default_depth(l))
    return _diff(l, _gfp_value(CANONICAL_LTS, l), comp.value)


@dataclass(frozen=True)
class Campaign:
    name: str
    kind: str
    tau: bool
    prop: Callable
    summary: str


CAMPAIGNS = {c.name: c for c in [
    Campaign("sdw-oracle", "dfa", False, sdw_oracle, "sdw fixpoint = product BFS"),
    Campaign("simulation-oracle", "lts", False, simulation_oracle_check, "simulation fixpoint = worklist"),
    Campaign("divergence-oracle", "lts", True, divergence_oracle, "divergence fixpoint = tau-cycle search"),
    Campaign("bisimulation-oracle", "lts", False, bisimulation_oracle, "canonical fixpoint = partition refinement"),
    Campaign("words-sdw", "dfa", False, hm_sdw, "word sup-distance = sdw fixpoint"),
    Campaign("tau-divergence", "lts", True, hm_divergence, "tau totality = divergence fixpoint"),
    Campaign("hm-similarity", "lts", False, hm_similarity, "HM inclusion = similarity"),
    Campaign("words-equality", "dfa", False, hm_dfa_equality, "word equality = canonical dfa fixpoint"),
    Campaign("hm-bisimilarity", "lts", False, hm_bisimilarity, "HM equality = bisimilarity"),
]}

# Positive HM (diamonds and conjunction) identifies mutually similar states,
# which is coarser than bisimilarity, so that campaign fails by design and is
# only run on request.
DEFAULT_CAMPAIGNS = tuple(n for n in CAMPAIGNS if n != "hm-bisimilarity")


@dataclass
class CampaignResult:
    name: str
    summary: str
    total: int
    passed: int
    first_index: Optional[int] = None
    first_message: Optional[str] = None
    shrunk: Optional[object] = None
    shrunk_message: Optional[str] = None

    @property
    def ok(self):
        return self.passed == self.total


def instances(campaign, count, seed, max_states, max_labels):
    rng = random.Random(f"{seed}/{campaign.name}")
    for _ in range(count):
        yield random_system(campaign.kind, rng, max_states, max_labels, campaign.tau)


def run_campaign(name, count=200, seed=42, max_states=6, max_labels=2, shrink_failures=True):
    campaign = CAMPAIGNS[name]
    result = CampaignResult(name, campaign.summary, count, 0)
    for i, system in enumerate(instances(campaign, count, seed, max_states, max_labels)):
        message = campaign.prop(system)
        if message is None:
            result.passed += 1
        elif result.first_index is None:
            result.first_index, result.first_message = i, message
            if shrink_failures:
                result.shrunk = shrink(system, lambda s: campaign.prop(s) is not None)
                result.shrunk_message = campaign.prop(result.shrunk)
    return result
