"""Coinductive predicates on finite automata and transition systems, and the modal logics that characterise them."""

from .fibres import BOOL, INF, LEVELS, FibreElement, fibre_bottom, fibre_leq, fibre_meet, fibre_top, reindex
from .fixpoint import approximant, gfp, is_postfixed
from .systems import Dfa, Lts, load_system, parse_system

__version__ = "0.1.0"
