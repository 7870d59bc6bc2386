"""Model checking of safe Petri nets with transits against Flow-LTL."""

from .errors import (
    BudgetExceeded,
    FlowMCError,
    InputError,
    NetStructureError,
    ParseError,
    SafenessError,
    UnsupportedError,
)
from .formulas import flow_subformulas, parse_flow_ltl, parse_ltl, render
from .net import (
    END,
    START,
    STUTTER,
    FlowChain,
    Lasso,
    PetriNet,
    PetriNetWithTransits,
    Step,
    enabled,
    extend_chains,
    fire,
    replay,
)
from .netio import dump_net, load_any, load_net, load_pnwt
from .pipeline import CheckResult, check_ltl, check_pnwt, check_sdn
from .reduction import ReducedProblem, map_counterexample, reduce, reduce_formula, reduce_net

__version__ = "0.1.0"
