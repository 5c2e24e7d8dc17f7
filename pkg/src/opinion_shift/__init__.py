"""Steady-state opinions under two leader parties and leader selection toward a target mean."""

from .dynamics import (OpinionObjective, SteadyState, integrate_transient, sample_participation,
                       steady_state, steady_state_absolute, steady_state_influenced,
                       steady_state_via_walks)
from .errors import (BudgetExceededError, NumericalError, OpinionShiftError, ParseError,
                     SingularMatrixError, ValidationError)
from .experiment import ExperimentSpec, generate_er, run_experiment
from .graph import (EquivalentGraph, LeaderConfig, Model, WeightedDigraph, build_equivalent,
                    gadget_graph, is_strongly_connected, load_edge_list)
from .numerics import (block_remove_inverse, laplacian_rank1_pinv_update, pinv,
                       sherman_morrison_update, solve)
from .selector import (SelectionProblem, SelectionResult, bound_search, brute_force, greedy,
                       greedy_fast)
from .single_leader import balance_absolute, balance_influenced, select_single
from .walks import AbsorbingChain, WalkKernel, effective_resistance, information_centrality

__version__ = "0.1.0"

__all__ = [
    "AbsorbingChain", "BudgetExceededError", "EquivalentGraph", "ExperimentSpec", "LeaderConfig",
    "Model", "NumericalError", "OpinionObjective", "OpinionShiftError", "ParseError",
    "SelectionProblem", "SelectionResult", "SingularMatrixError", "SteadyState",
    "ValidationError", "WalkKernel", "WeightedDigraph", "balance_absolute", "balance_influenced",
    "block_remove_inverse", "bound_search", "brute_force", "build_equivalent",
    "effective_resistance", "gadget_graph", "generate_er", "greedy", "greedy_fast",
    "information_centrality", "integrate_transient", "is_strongly_connected",
    "laplacian_rank1_pinv_update", "load_edge_list", "pinv", "run_experiment",
    "sample_participation", "select_single", "sherman_morrison_update", "solve", "steady_state",
    "steady_state_absolute", "steady_state_influenced", "steady_state_via_walks",
]
