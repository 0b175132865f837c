"""Multicommodity-flow MIP for the depot/microhub tunnel design problem.

Every microhub is its own commodity. Binary ``y`` opens nodes, binary ``x``
builds directed tunnel arcs, continuous ``f[v]`` routes commodity ``v``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .engine import INT_TOL, Limits, MilpModel, MilpResult, milp_solve
from .instance import BUDGET_TOL, Instance, expand_directed, require_valid


class InfeasibleError(RuntimeError):
    """The instance admits no network opening exactly n_d depots."""


def y_name(i: str) -> str:
    return f"y({i})"


def x_name(i: str, j: str) -> str:
    return f"x({i},{j})"


def f_name(v: str, i: str, j: str) -> str:
    return f"f({v},{i},{j})"


@dataclass
class VariableMap:
    y: dict[str, int]
    x: dict[tuple[str, str], int]
    f: dict[tuple[str, str, str], int] = field(default_factory=dict)


@dataclass
class NetworkSolution:
    depots: list[str]
    served: list[str]
    arcs: list[tuple[str, str]]
    depot_demand: dict[str, int]
    objective: int

    def trees(self) -> dict[str, list[tuple[str, str]]]:
        """Arcs grouped by the depot whose tree contains them."""
        children = defaultdict(list)
        for i, j in self.arcs:
            children[i].append(j)
        out = {}
        for h in self.depots:
            arcs, stack = [], [h]
            while stack:
                u = stack.pop()
                for v in sorted(children[u], reverse=True):
                    arcs.append((u, v))
                    stack.append(v)
            out[h] = sorted(arcs)
        return out

    def depot_of(self) -> dict[str, str]:
        return {j: h for h, arcs in self.trees().items() for _, j in arcs}

    def length(self, instance: Instance) -> float:
        return sum(instance.distance[a] for a in self.arcs)


def _infeasibility_reason(instance: Instance) -> str:
    cheapest = sorted(
        min((instance.distance[(h, j)] for j in instance.neighbors[h]), default=np.inf)
        for h in instance.depots
    )
    if sum(cheapest[: instance.n_d]) > instance.budget + BUDGET_TOL:
        return "depot root arc cannot be afforded"
    return "no network with the required depots fits the budget and capacity"


def build_mip(instance: Instance) -> tuple[MilpModel, VariableMap]:
    require_valid(instance)
    arcs = expand_directed(instance)
    M, H = instance.microhubs, instance.depots
    P = instance.demand
    model = MilpModel(f"mip-{instance.name}")
    vm = VariableMap({}, {})
    for i in H + M:
        vm.y[i] = model.add_var(y_name(i), 0, 1, binary=True, obj=P[i] if i in P and i in M else 0.0)
    for a in arcs:
        vm.x[(a.tail, a.head)] = model.add_var(x_name(a.tail, a.head), 0, 1, binary=True)
    for v in M:
        for a in arcs:
            vm.f[(v, a.tail, a.head)] = model.add_var(f_name(v, a.tail, a.head), 0, 1)

    out_arcs, in_arcs = defaultdict(list), defaultdict(list)
    for a in arcs:
        out_arcs[a.tail].append((a.tail, a.head))
        in_arcs[a.head].append((a.tail, a.head))

    for i in M:
        for v in M:
            row = defaultdict(float)
            for a in in_arcs[i]:
                row[vm.f[(v, *a)]] += 1
            for a in out_arcs[i]:
                row[vm.f[(v, *a)]] -= 1
            if i == v:
                row[vm.y[v]] -= 1
            model.add_constraint(row, "==", 0, f"flow({i},{v})")
    model.add_constraint({vm.x[(a.tail, a.head)]: a.distance for a in arcs}, "<=", instance.budget, "budget")
    for h in H:
        row = {vm.x[a]: 1 for a in out_arcs[h]}
        row[vm.y[h]] = -1
        model.add_constraint(row, "==", 0, f"root({h})")
    model.add_constraint({vm.y[h]: 1 for h in H}, "==", instance.n_d, "depots")
    for j in M:
        row = {vm.x[a]: 1 for a in in_arcs[j]}
        row[vm.y[j]] = -1
        model.add_constraint(row, "==", 0, f"indeg({j})")
    for h in H:
        row = {vm.f[(v, *a)]: P[v] for v in M for a in out_arcs[h] if P[v]}
        model.add_constraint(row, "<=", instance.p_max, f"cap({h})")
    for v in M:
        for a in arcs:
            key = (a.tail, a.head)
            model.add_constraint({vm.f[(v, *key)]: 1, vm.x[key]: -1}, "<=", 0, f"couple({v},{a.tail},{a.head})")
    return model, vm


def _tree_arcs(instance: Instance, chosen: list[tuple[str, str]], served: set[str]) -> list[tuple[str, str]]:
    """Drop arcs that serve nothing (arcs into depots or into closed hubs)."""
    return sorted(a for a in chosen if a[1] in served and not instance.is_depot(a[1]))


def solution_from_values(instance: Instance, vm: VariableMap, values) -> NetworkSolution:
    """Read a network out of integer-feasible values (flows used when present)."""
    on = lambda j: values[j] > 0.5
    depots = sorted(h for h in instance.depots if on(vm.y[h]))
    served = sorted(m for m in instance.microhubs if on(vm.y[m]))
    chosen = [a for a, j in vm.x.items() if on(j)]
    arcs = _tree_arcs(instance, chosen, set(served))
    sol = NetworkSolution(depots, served, arcs, {}, sum(instance.demand[m] for m in served))
    by_tree = _tree_demand(instance, sol)
    if vm.f:
        P = instance.demand
        flows = {}
        for h in depots:
            net = 0.0
            for v in instance.microhubs:
                for nb in instance.neighbors[h]:
                    net += P[v] * (values[vm.f[(v, h, nb)]] - values[vm.f[(v, nb, h)]])
            flows[h] = int(round(net))
            if abs(net - by_tree.get(h, 0)) > 1e-4 * max(1, abs(net)):
                raise RuntimeError(f"flow demand {net} at {h} disagrees with tree demand {by_tree.get(h, 0)}")
        sol.depot_demand = flows
    else:
        sol.depot_demand = {h: by_tree.get(h, 0) for h in depots}
    return sol


def _tree_demand(instance: Instance, sol: NetworkSolution) -> dict[str, int]:
    return {h: sum(instance.demand[j] for _, j in arcs) for h, arcs in sol.trees().items()}


@dataclass
class MipOutcome:
    result: MilpResult
    solution: NetworkSolution | None
    model: MilpModel
    variables: VariableMap


def solve_mip(instance: Instance, limits: Limits | None = None) -> MipOutcome:
    """Solve the full flow formulation; raises InfeasibleError when no network exists."""
    model, vm = build_mip(instance)
    result = milp_solve(model, None, limits)
    if result.status == "infeasible":
        raise InfeasibleError(_infeasibility_reason(instance))
    sol = None if result.x is None else solution_from_values(instance, vm, result.x)
    return MipOutcome(result, sol, model, vm)


def check_solution(instance: Instance, solution: NetworkSolution) -> list[str]:
    """Every structural problem with ``solution``, found without any solver."""
    problems = []
    P = instance.demand
    arcs = list(solution.arcs)
    for a in arcs:
        if a not in instance.distance:
            problems.append(f"arc {a[0]}->{a[1]} is not a candidate arc")
    if len(set(arcs)) != len(arcs):
        problems.append("duplicate arcs")
    arcs = [a for a in dict.fromkeys(arcs) if a in instance.distance]

    open_depots = set(solution.depots)
    served = set(solution.served)
    for h in open_depots:
        if h not in instance.node or not instance.is_depot(h):
            problems.append(f"{h} is not a depot")
    for m in served:
        if m not in instance.node or instance.is_depot(m):
            problems.append(f"{m} is not a microhub")
    if len(open_depots) != instance.n_d:
        problems.append(f"{len(open_depots)} depots open, expected {instance.n_d}")

    indeg, outdeg = defaultdict(int), defaultdict(int)
    for i, j in arcs:
        outdeg[i] += 1
        indeg[j] += 1
    for h in instance.depots:
        if indeg[h]:
            problems.append(f"arc enters depot {h}")
        if h in open_depots and outdeg[h] != 1:
            problems.append(f"depot {h} has out-degree {outdeg[h]}, expected 1")
        if h not in open_depots and outdeg[h]:
            problems.append(f"closed depot {h} has arcs")
    for m in instance.microhubs:
        want = 1 if m in served else 0
        if indeg[m] != want:
            problems.append(f"microhub {m} has in-degree {indeg[m]}, expected {want}")
        if m not in served and outdeg[m]:
            problems.append(f"unserved microhub {m} has outgoing arcs")

    # weak components via union-find
    parent = {}

    def find(u):
        parent.setdefault(u, u)
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    nodes = open_depots | served | {u for a in arcs for u in a}
    for u in nodes:
        find(u)
    for i, j in arcs:
        parent[find(i)] = find(j)
    comps = defaultdict(set)
    for u in nodes:
        comps[find(u)].add(u)
    comp_arcs = defaultdict(int)
    for i, j in arcs:
        comp_arcs[find(i)] += 1
    if len(comps) != instance.n_d:
        problems.append(f"{len(comps)} components, expected {instance.n_d}")
    tree_demand = {}
    for root, members in sorted(comps.items(), key=lambda kv: min(kv[1])):
        depots_here = sorted(u for u in members if u in instance.node and instance.is_depot(u))
        if len(depots_here) != 1:
            problems.append(f"component {sorted(members)} contains {len(depots_here)} depots")
        if comp_arcs[root] != len(members) - 1:
            problems.append(f"component contains cycle: {sorted(members)}")
        demand = sum(P.get(u, 0) for u in members if u in served)
        if len(depots_here) == 1:
            tree_demand[depots_here[0]] = demand
        if instance.p_max is not None and demand > instance.p_max:
            problems.append(f"depot capacity exceeded: {demand} > {instance.p_max} in {sorted(members)}")

    length = sum(instance.distance[a] for a in arcs)
    if length > instance.budget + BUDGET_TOL:
        problems.append(f"budget exceeded: {length} > {instance.budget}")
    if solution.objective != sum(P[m] for m in served if m in P):
        problems.append("objective does not equal served demand")
    for h, d in solution.depot_demand.items():
        if h in tree_demand and tree_demand[h] != d:
            problems.append(f"depot {h} reports demand {d} but its tree carries {tree_demand[h]}")
        if instance.p_max is not None and d > instance.p_max and h not in tree_demand:
            problems.append(f"depot capacity exceeded at {h}: {d} > {instance.p_max}")
    return problems
