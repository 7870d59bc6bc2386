"""Explicit-state LTL model checking of safe nets with inhibitor arcs."""

from .buchi import BuchiAutomaton, Tableau, ltl_to_buchi
from .checker import EdgeLabeler, Verdict, model_check
from .stategraph import DEFAULT_MAX_STATES, StateGraph, build_state_graph

__all__ = [
    "BuchiAutomaton",
    "Tableau",
    "ltl_to_buchi",
    "EdgeLabeler",
    "Verdict",
    "model_check",
    "DEFAULT_MAX_STATES",
    "StateGraph",
    "build_state_graph",
]
