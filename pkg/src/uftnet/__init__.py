"""Design underground freight tunnel networks by branch and cut."""

from .analytics import CostBreakdown, CostParams, SavingsReport, cost_breakdown, savings, solution_cost
from .engine import Limits, MilpModel, MilpResult, lp_solve, milp_solve
from .formulation import InfeasibleError, NetworkSolution, build_mip, check_solution, solve_mip
from .instance import (
    CandidateArc,
    Instance,
    InvalidInstanceError,
    Node,
    Params,
    compute_p_max,
    generate_grid_city,
    make_instance,
    validate,
)
from .master import CutRecord, build_mp, decompose_candidate, solve_mp
from .oracle import enumerate_solutions, feasible_set
from .sweep import budget_sweep, run_solver

__version__ = "0.1.0"


def bundled_instance(name: str = "grid5x5") -> Instance:
    """Load an instance shipped in ``uftnet/data``."""
    from importlib.resources import files

    from .io import instance_from_json
    import json

    text = files(__package__).joinpath("data", f"{name}.json").read_text(encoding="utf-8")
    return instance_from_json(json.loads(text))
