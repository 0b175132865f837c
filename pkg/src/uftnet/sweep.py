"""Run any of the three solvers uniformly, and sweep tunnel budgets."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .analytics import DEFAULT_SPEED_MPH, CostParams, savings, solution_cost
from .engine import Limits
from .formulation import InfeasibleError, NetworkSolution, solve_mip
from .instance import Instance
from .master import CutRecord, solve_mp
from .oracle import enumerate_solutions, orient

log = logging.getLogger(__name__)

METHODS = ("mip", "mp", "oracle")


@dataclass
class SolveRecord:
    method: str
    status: str  # optimal | limit | infeasible
    solution: NetworkSolution | None
    nodes: int = 0
    cuts_added: int = 0
    wall_seconds: float = 0.0
    bound: float | None = None
    reason: str = ""
    cuts: list[CutRecord] = field(default_factory=list)


def run_solver(instance: Instance, method: str, limits: Limits | None = None) -> SolveRecord:
    start = time.perf_counter()
    try:
        if method == "mip":
            out = solve_mip(instance, limits)
            r = out.result
            return SolveRecord(method, r.status, out.solution, r.nodes, r.cuts_added, r.wall_time, r.bound)
        if method == "mp":
            out = solve_mp(instance, limits)
            r = out.result
            return SolveRecord(method, r.status, out.solution, r.nodes, r.cuts_added, r.wall_time, r.bound,
                               cuts=out.cuts)
        if method == "oracle":
            res = enumerate_solutions(instance)
            elapsed = time.perf_counter() - start
            if not res.feasible:
                return SolveRecord(method, "infeasible", None, wall_seconds=elapsed,
                                   reason="no feasible arc subset")
            sol = orient(instance, sorted(res.optimal_arc_sets[0]))
            return SolveRecord(method, "optimal", sol, res.n_feasible, 0, elapsed, float(res.objective))
    except InfeasibleError as exc:
        return SolveRecord(method, "infeasible", None, wall_seconds=time.perf_counter() - start, reason=str(exc))
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def sweep_row(instance: Instance, budget: float, method: str, limits: Limits | None,
              cost_params: CostParams | None = None, speed_mph: float = DEFAULT_SPEED_MPH) -> dict:
    inst = instance.with_budget(budget)
    rec = run_solver(inst, method, limits)
    row = {"budget": budget, "method": method, "status": rec.status,
           "wall_seconds": round(rec.wall_seconds, 6), "objective": None}
    sol = rec.solution
    if sol is not None:
        rep = savings(inst, sol)
        row.update(objective=sol.objective, percent_served=round(rep.percent_served, 6),
                   trucks_saved=rep.trucks, truck_miles_saved=round(rep.truck_miles, 6),
                   co2_truck_g=round(rep.truck_co2_g, 3), co2_van_g=round(rep.van_co2_g, 3))
        if sol.objective > 0 and sol.arcs:
            row["cost_per_package"] = round(solution_cost(inst, sol, cost_params, speed_mph).total, 6)
    return row


def _row_job(args):
    return sweep_row(*args)


def budget_sweep(instance: Instance, budgets, method: str = "mp", limits: Limits | None = None,
                 cost_params: CostParams | None = None, speed_mph: float = DEFAULT_SPEED_MPH,
                 jobs: int = 1) -> tuple[list[dict], list[str]]:
    """One independent solve per budget; rows come back sorted by budget.

    Also returns warnings for any budget where the objective drops below the
    one at a smaller budget, which would point at a solver bug.
    """
    budgets = sorted(budgets)
    args = [(instance, b, method, limits, cost_params, speed_mph) for b in budgets]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row_job, args))
    else:
        rows = [_row_job(a) for a in args]
    warnings = []
    best = None
    for row in rows:
        obj = row["objective"]
        if obj is None:
            continue
        if best is not None and obj < best[1]:
            msg = f"objective {obj} at budget {row['budget']} is below {best[1]} at budget {best[0]}"
            log.warning(msg)
            warnings.append(msg)
        if best is None or obj >= best[1]:
            best = (row["budget"], obj)
    return rows, warnings
