"""Senescent ground tree rewrite systems and reset Petri net coverability."""

from .trees import Context, RankedAlphabet, Tree, decompose, parse_tree, substitute, validate_tree
from .automata import (
    NTA,
    ParikhVector,
    RegularAutomaton,
    automaton_from_vectors,
    nta_accepts,
    nta_empty,
    nta_enumerate,
    parikh_of_automaton,
    parikh_of_word,
    singleton_nta,
)
from .systems import SGTRS, Configuration, Rule, is_weakly_extended, successors, underlying_control_graph
from .senescent import (
    AgedConfiguration,
    SenescentSystem,
    reach_control,
    reach_regular,
    senescent_successors,
    step,
)
from .resetnet import Marking, PnRule, ResetNet, pn_cover_backward, pn_cover_forward, pn_reach_forward, pn_step
from .mpds import MPDS, MpdsRule, mpds_reach_control, mpds_step
from .encodings import encode_cover, encode_reach, encode_scoped
from .summaries import (
    Interface,
    Summary,
    build_istigtrs,
    build_pnreach,
    decide_control_reachability,
    interface_parikh,
    summary_add,
    summary_resolve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
