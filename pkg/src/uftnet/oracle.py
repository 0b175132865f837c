"""Exhaustive reference solver for tiny instances.

Enumerates every subset of undirected candidate arcs. A subset is feasible
when it splits into exactly n_d trees, each holding one depot of degree 1,
within budget and depot capacity. Orienting each tree away from its depot
gives the directed network.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .formulation import NetworkSolution
from .instance import BUDGET_TOL, Instance, require_valid

MAX_ARCS = 22


@dataclass
class OracleResult:
    objective: int | None  # None when infeasible
    optimal_arc_sets: list[frozenset[tuple[str, str]]] = field(default_factory=list)
    n_feasible: int = 0

    @property
    def feasible(self) -> bool:
        return self.objective is not None


def _check_size(instance: Instance) -> None:
    if len(instance.arcs) > MAX_ARCS:
        raise ValueError(f"oracle handles at most {MAX_ARCS} candidate arcs, got {len(instance.arcs)}")


def orient(instance: Instance, edges) -> NetworkSolution | None:
    """Orient undirected ``edges`` into depot-rooted trees, or None if infeasible."""
    if not edges:
        return None
    adj = defaultdict(list)
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen: set[str] = set()
    depots, arcs, depot_demand = [], [], {}
    P = instance.demand
    n_components = 0
    for start in sorted(adj):
        if start in seen:
            continue
        n_components += 1
        comp, stack = [start], [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        comp_depots = [u for u in comp if instance.is_depot(u)]
        comp_edges = sum(len(adj[u]) for u in comp) // 2
        if len(comp_depots) != 1 or comp_edges != len(comp) - 1:
            return None
        h = comp_depots[0]
        if len(adj[h]) != 1:
            return None
        demand = sum(P[u] for u in comp)
        if demand > instance.p_max:
            return None
        depots.append(h)
        depot_demand[h] = demand
        stack, parent = [h], {h: None}
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v != parent[u]:
                    parent[v] = u
                    arcs.append((u, v))
                    stack.append(v)
    if n_components != instance.n_d:
        return None
    if sum(instance.distance[e] for e in edges) > instance.budget + BUDGET_TOL:
        return None
    served = sorted(j for _, j in arcs)
    return NetworkSolution(sorted(depots), served, sorted(arcs), depot_demand, sum(P[m] for m in served))


def _subsets(instance: Instance, max_arcs: int | None):
    keys = [arc.key for arc in instance.arcs]
    for mask in range(1 << len(keys)):
        if max_arcs is not None and bin(mask).count("1") > max_arcs:
            continue
        yield mask, [keys[k] for k in range(len(keys)) if mask >> k & 1]


def feasible_set(instance: Instance, max_arcs: int | None = None) -> list[NetworkSolution]:
    """All feasible networks in ascending subset-bitmask order."""
    require_valid(instance)
    _check_size(instance)
    out = []
    for _, edges in _subsets(instance, max_arcs):
        sol = orient(instance, edges)
        if sol is not None:
            out.append(sol)
    return out


def enumerate_solutions(instance: Instance, max_arcs: int | None = None) -> OracleResult:
    """Best objective over every arc subset, with all subsets attaining it."""
    require_valid(instance)
    _check_size(instance)
    best, best_sets, count = None, [], 0
    for _, edges in _subsets(instance, max_arcs):
        sol = orient(instance, edges)
        if sol is None:
            continue
        count += 1
        if best is None or sol.objective > best:
            best, best_sets = sol.objective, [frozenset(edges)]
        elif sol.objective == best:
            best_sets.append(frozenset(edges))
    return OracleResult(best, best_sets, count)
