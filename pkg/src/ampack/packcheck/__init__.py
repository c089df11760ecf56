"""Batch packing feasibility: bounds, relaxations and exact packing."""
from .bar import BarResult, Pattern, bar_relaxation_bound, pricing_subproblem
from .dff import (DualFeasibleFunction, default_combinations, dff_infeasibility_check,
                  registered_functions)
from .exact import FEASIBLE, INFEASIBLE, TIMEOUT, PackResult, exact_2dopr
from .lower_bound import cut_into_squares, lb_dmv
from .lp import LPError, LPResult, solve_lp_with_duals
from .pipeline import STAGES, CheckBudgets, CheckOutcome, check_batch, reduce_infeasible_subset
from .points import adjusted_minimal_mim_set, adjusted_normal_patterns

__all__ = [
    "BarResult", "Pattern", "bar_relaxation_bound", "pricing_subproblem",
    "DualFeasibleFunction", "default_combinations", "dff_infeasibility_check", "registered_functions",
    "FEASIBLE", "INFEASIBLE", "TIMEOUT", "PackResult", "exact_2dopr",
    "cut_into_squares", "lb_dmv",
    "LPError", "LPResult", "solve_lp_with_duals",
    "STAGES", "CheckBudgets", "CheckOutcome", "check_batch", "reduce_infeasible_subset",
    "adjusted_minimal_mim_set", "adjusted_normal_patterns",
]
