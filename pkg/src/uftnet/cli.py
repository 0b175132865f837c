"""Command-line entry point: ``uftnet gen | solve | sweep | report``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io as uio
from .analytics import DEFAULT_SPEED_MPH, CostParams, format_cost_table, percent_served, savings, solution_cost
from .engine import Limits
from .formulation import check_solution
from .instance import generate_grid_city
from .sweep import METHODS, budget_sweep, run_solver

COST_PARAMS_ENV = "UFTNET_COST_PARAMS"

EXIT_CODES = {"optimal": 0, "limit": 2, "infeasible": 3}


def _positive_pct(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("pct must be in (0, 1]")
    return v


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("depot position must be x,y") from None
    return x, y


def load_cost_params(path: str | None) -> CostParams:
    path = path or os.environ.get(COST_PARAMS_ENV)
    if not path:
        return CostParams()
    with open(path, encoding="utf-8") as fh:
        return CostParams.from_json(json.load(fh))


def cmd_gen(args) -> int:
    inst = generate_grid_city(
        args.rows, args.cols, args.spacing,
        depot_positions=args.depot or None,
        demand_pct=args.pct, seed=args.seed,
        n_d=args.n_d, budget_miles=args.budget,
        depot_degree=args.depot_degree, zone_block=args.zone_block,
        p_max=args.p_max,
    )
    uio.write_instance(inst, args.out)
    print(f"wrote {args.out}: {len(inst.microhubs)} microhubs, {len(inst.arcs)} arcs", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    inst = uio.read_instance(args.instance)
    if args.budget is not None:
        inst = inst.with_budget(args.budget)
    rec = run_solver(inst, args.method, Limits(args.time_limit, None, args.lp_backend))
    sol = rec.solution
    pct = percent_served(inst, sol) if sol is not None else None
    doc = uio.solution_to_json(inst, sol, method=args.method, status=rec.status, nodes=rec.nodes,
                               cuts_added=rec.cuts_added, wall_seconds=rec.wall_seconds,
                               cuts=rec.cuts if args.method == "mp" else None, percent=pct)
    uio.atomic_write(args.out, uio.dumps(doc))
    if args.cut_log and args.method == "mp":
        uio.atomic_write(args.cut_log, uio.cut_log_lines(rec.cuts))
    if args.geojson and sol is not None:
        uio.atomic_write(args.geojson, uio.dumps(uio.solution_geojson(inst, sol)))
    if sol is not None:
        problems = check_solution(inst, sol)
        if problems:
            print("solution check failed: " + "; ".join(problems), file=sys.stderr)
            return 1
    summary = f"{args.method} {rec.status}"
    if sol is not None:
        summary += f" objective={sol.objective} served={pct:.2f}%"
    if rec.reason:
        summary += f" ({rec.reason})"
    summary += f" nodes={rec.nodes} cuts={rec.cuts_added} time={rec.wall_seconds:.2f}s"
    print(summary, file=sys.stderr)
    return EXIT_CODES[rec.status]


def cmd_sweep(args) -> int:
    inst = uio.read_instance(args.instance)
    budgets = uio.parse_budgets(args.budgets)
    rows = []
    for method in args.method:
        got, warnings = budget_sweep(inst, budgets, method, Limits(args.time_limit, None, args.lp_backend),
                                     load_cost_params(args.cost_params), args.speed, args.jobs)
        rows += got
        for w in warnings:
            print(f"warning ({method}): {w}", file=sys.stderr)
    uio.atomic_write(args.out, uio.sweep_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    inst, sol, _ = uio.read_solution(args.solution)
    if sol is None or sol.objective == 0:
        print("error: no packages served; per-package cost is undefined", file=sys.stderr)
        return 3
    problems = check_solution(inst, sol)
    if problems:
        print("error: solution fails checks: " + "; ".join(problems), file=sys.stderr)
        return 1
    rep = savings(inst, sol)
    cost = solution_cost(inst, sol, load_cost_params(args.cost_params), args.speed)
    doc = {"savings": rep.to_json(), "cost": cost.to_json()}
    if args.json:
        uio.atomic_write(args.json, uio.dumps(doc))
    else:
        print(json.dumps(doc, indent=2))
    print(f"served {sol.objective} packages/day ({rep.percent_served:.2f}%), "
          f"{rep.trucks} truck trips and {rep.truck_miles:,.1f} truck miles avoided per day")
    print(format_cost_table(cost))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uftnet", description="Underground freight network design.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic grid city instance")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--spacing", type=float, default=1.5)
    g.add_argument("--pct", type=_positive_pct, default=0.15)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--depot", type=_point, action="append", help="depot position x,y (repeatable)")
    g.add_argument("--n-d", type=int, default=1)
    g.add_argument("--budget", type=float, default=15.0)
    g.add_argument("--p-max", type=int, default=None)
    g.add_argument("--depot-degree", type=int, default=3)
    g.add_argument("--zone-block", type=int, default=2)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--method", choices=METHODS, default="mp")
    s.add_argument("--out", required=True)
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--budget", type=float, default=None, help="override the instance budget")
    s.add_argument("--lp-backend", choices=["simplex", "highs"], default="simplex")
    s.add_argument("--cut-log", default=None, help="write the cut log as JSON lines")
    s.add_argument("--geojson", default=None)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="solve across a range of tunnel budgets")
    w.add_argument("--instance", required=True)
    w.add_argument("--budgets", default="15:270:15")
    w.add_argument("--method", choices=METHODS, action="append", default=None)
    w.add_argument("--out", required=True)
    w.add_argument("--time-limit", type=float, default=None)
    w.add_argument("--lp-backend", choices=["simplex", "highs"], default="simplex")
    w.add_argument("--cost-params", default=None)
    w.add_argument("--speed", type=float, default=DEFAULT_SPEED_MPH, help="carriage speed, mph")
    w.add_argument("--jobs", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="savings and cost per package for a solution")
    r.add_argument("--solution", required=True)
    r.add_argument("--cost-params", default=None)
    r.add_argument("--speed", type=float, default=DEFAULT_SPEED_MPH, help="carriage speed, mph")
    r.add_argument("--json", default=None, help="write the machine-readable report here")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "method", None) is None and args.command == "sweep":
        args.method = ["mp"]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
