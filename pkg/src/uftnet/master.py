"""Cutting-plane decomposition over the binary design variables only.

The master model drops the flow variables. Integer candidates are repaired
lazily: disconnected pieces get connectivity cuts plus a depot-connectivity
inequality, and trees over depot capacity get a subtree capacity cut plus a
depot-capacity inequality over the whole tree.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .engine import FEAS_TOL, Constraint, Limits, MilpModel, MilpResult, milp_solve
from .formulation import (
    InfeasibleError,
    NetworkSolution,
    VariableMap,
    _infeasibility_reason,
    solution_from_values,
    x_name,
    y_name,
)
from .instance import Instance, expand_directed, require_valid

CAPACITY = "capacity-feasibility"
CONNECTIVITY = "connectivity"
DEPOT_CAPACITY_VI = "depot-capacity-VI"
DEPOT_CONNECTIVITY_VI = "depot-connectivity-VI"


@dataclass
class CutRecord:
    """A lazily generated row over named x/y variables."""

    kind: str
    nodes: tuple[str, ...]
    coefs: dict[str, float]
    sense: str
    rhs: float
    iteration: int = 0
    target: str | None = None  # microhub k for connectivity-type rows
    candidate_activity: float | None = None  # row activity at the triggering candidate

    @property
    def key(self) -> tuple:
        return (self.kind, self.nodes, self.target)

    def activity(self, values: dict[str, float]) -> float:
        return sum(c * values.get(name, 0.0) for name, c in self.coefs.items())

    def is_violated(self, values: dict[str, float], tol: float = FEAS_TOL) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs > self.rhs + tol
        if self.sense == ">=":
            return lhs < self.rhs - tol
        return abs(lhs - self.rhs) > tol

    def violated_at_candidate(self, tol: float = FEAS_TOL) -> bool:
        if self.candidate_activity is None:
            return False
        if self.sense == "<=":
            return self.candidate_activity > self.rhs + tol
        return self.candidate_activity < self.rhs - tol

    def to_json(self) -> dict:
        return {"kind": self.kind, "nodes": list(self.nodes), "iteration": self.iteration,
                "target": self.target, "sense": self.sense, "rhs": self.rhs, "coefs": self.coefs,
                "candidate_activity": self.candidate_activity}


@dataclass
class MasterModel:
    model: MilpModel
    variables: VariableMap


def build_mp(instance: Instance) -> MasterModel:
    require_valid(instance)
    arcs = expand_directed(instance)
    M, H = instance.microhubs, instance.depots
    P = instance.demand
    model = MilpModel(f"mp-{instance.name}")
    vm = VariableMap({}, {})
    for i in H + M:
        vm.y[i] = model.add_var(y_name(i), 0, 1, binary=True, obj=P[i] if i in M else 0.0)
    for a in arcs:
        vm.x[(a.tail, a.head)] = model.add_var(x_name(a.tail, a.head), 0, 1, binary=True)

    out_arcs, in_arcs = defaultdict(list), defaultdict(list)
    for a in arcs:
        out_arcs[a.tail].append((a.tail, a.head))
        in_arcs[a.head].append((a.tail, a.head))

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
    for (i, j), k in vm.x.items():
        if not instance.is_depot(i):
            model.add_constraint({k: 1, vm.y[i]: -1}, "<=", 0, f"link({i},{j})")
    forest = {k: 1.0 for k in vm.x.values()}
    for i in H + M:
        forest[vm.y[i]] = -1.0
    model.add_constraint(forest, "==", -instance.n_d, "forest")
    for arc in instance.arcs:
        i, j = arc.key
        model.add_constraint({vm.x[(i, j)]: 1, vm.x[(j, i)]: 1}, "<=", 1, f"cycle2({i},{j})")
    model.add_constraint({vm.y[m]: P[m] for m in M if P[m]}, "<=", instance.n_d * instance.p_max, "aggregate")
    return MasterModel(model, vm)


# ---------------------------------------------------------------------------
# candidate structure


@dataclass
class Component:
    nodes: tuple[str, ...]
    depots: tuple[str, ...]
    microhubs: tuple[str, ...]
    demand: int
    arcs: tuple[tuple[str, str], ...]

    @property
    def is_tree(self) -> bool:
        return len(self.arcs) == len(self.nodes) - 1


@dataclass
class ComponentDecomposition:
    components: list[Component]
    n_d: int
    open_depots: tuple[str, ...] = ()

    @property
    def matches_depot_count(self) -> bool:
        return len(self.components) == self.n_d

    @property
    def depot_free(self) -> list[Component]:
        return [c for c in self.components if not c.depots]


def decompose_candidate(instance: Instance, arcs, selected=()) -> ComponentDecomposition:
    """Weak components of the graph on chosen ``arcs`` and ``selected`` nodes."""
    arcs = sorted(set(arcs))
    parent: dict[str, str] = {}

    def find(u):
        parent.setdefault(u, u)
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for u in selected:
        find(u)
    for i, j in arcs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[str, list[str]] = defaultdict(list)
    for u in list(parent):
        groups[find(u)].append(u)
    comp_arcs: dict[str, list] = defaultdict(list)
    for a in arcs:
        comp_arcs[find(a[0])].append(a)
    P = instance.demand
    comps = []
    for root, members in groups.items():
        members = tuple(sorted(members))
        depots = tuple(u for u in members if instance.is_depot(u))
        hubs = tuple(u for u in members if not instance.is_depot(u))
        comps.append(Component(members, depots, hubs, sum(P[u] for u in hubs), tuple(comp_arcs[root])))
    comps.sort(key=lambda c: c.nodes[0])
    open_depots = tuple(sorted(u for c in comps for u in c.depots))
    return ComponentDecomposition(comps, instance.n_d, open_depots)


def candidate_values(master: MasterModel, values) -> dict[str, float]:
    return {name: float(values[j]) for name, j in master.model._index.items()}


def network_values(instance: Instance, solution: NetworkSolution) -> dict[str, float]:
    """x/y assignment of a network, for evaluating cut rows."""
    vals = {y_name(i): 0.0 for i in instance.depots + instance.microhubs}
    for h in solution.depots:
        vals[y_name(h)] = 1.0
    for m in solution.served:
        vals[y_name(m)] = 1.0
    for i, j in solution.arcs:
        vals[x_name(i, j)] = 1.0
    return vals


# ---------------------------------------------------------------------------
# separation


def _by_demand(instance: Instance, hubs):
    P = instance.demand
    return sorted(hubs, key=lambda u: (-P[u], u))


def greedy_violating_subtree(instance: Instance, component: Component) -> tuple[str, ...]:
    """Grow from the heaviest microhub, always adding the heaviest tree neighbour,
    until the collected demand first exceeds depot capacity."""
    P = instance.demand
    hubs = set(component.microhubs)
    adj = defaultdict(set)
    for i, j in component.arcs:
        if i in hubs and j in hubs:
            adj[i].add(j)
            adj[j].add(i)
    start = _by_demand(instance, hubs)[0]
    chosen, total = [start], P[start]
    frontier = set(adj[start])
    while total <= instance.p_max and frontier:
        nxt = _by_demand(instance, frontier)[0]
        chosen.append(nxt)
        total += P[nxt]
        frontier |= adj[nxt]
        frontier -= set(chosen)
    return tuple(sorted(chosen))


def _x_row(instance: Instance, pairs) -> dict[str, float]:
    return {x_name(i, j): 1.0 for i, j in pairs if (i, j) in instance.distance}


def separate_capacity(instance: Instance, component: Component, iteration: int = 0) -> list[CutRecord]:
    """Capacity cut on a greedy minimal subtree plus the depot-capacity inequality
    on the whole tree; empty when the component is within capacity."""
    if component.demand <= instance.p_max or not component.microhubs:
        return []
    cuts = []
    sub = greedy_violating_subtree(instance, component)
    if len(sub) == 1:
        # a lone microhub above capacity can never be served
        cuts.append(CutRecord(CAPACITY, sub, {y_name(sub[0]): 1.0}, "<=", 0.0, iteration))
    else:
        inner = [(i, j) for i in sub for j in sub if i != j]
        cuts.append(CutRecord(CAPACITY, sub, _x_row(instance, inner), "<=", len(sub) - 2.0, iteration))

    members = set(component.nodes)
    P = instance.demand
    coefs: dict[str, float] = {}
    for i, j in instance.distance:
        if j not in members:
            continue
        if i in members:
            if P[j]:
                coefs[x_name(i, j)] = float(P[j])
        elif instance.n_d > 1:
            coefs[x_name(i, j)] = float((1 - instance.n_d) * instance.p_max)
    cuts.append(CutRecord(DEPOT_CAPACITY_VI, component.nodes, coefs, "<=", float(instance.p_max), iteration))
    return cuts


def separate_connectivity(instance: Instance, decomposition: ComponentDecomposition,
                          iteration: int = 0) -> list[CutRecord]:
    """Connectivity cuts for the two heaviest hubs of each depot-free component,
    plus one depot-connectivity inequality for its heaviest hub."""
    loose = decomposition.depot_free
    if not loose:
        return []
    rooted = sorted(u for c in decomposition.components if c.depots for u in c.nodes)
    rooted_set = set(rooted)
    leaving = {x_name(i, j): 1.0 for (i, j) in instance.distance if i in rooted_set and j not in rooted_set}
    cuts = []
    for comp in loose:
        members = set(comp.nodes)
        entering = {x_name(i, j): 1.0 for (i, j) in instance.distance if j in members and i not in members}
        ranked = _by_demand(instance, comp.microhubs)
        for k in ranked[:2]:
            row = dict(entering)
            row[y_name(k)] = row.get(y_name(k), 0.0) - 1.0
            cuts.append(CutRecord(CONNECTIVITY, comp.nodes, row, ">=", 0.0, iteration, k))
        k_hat = ranked[0]
        row = dict(leaving)
        row[y_name(k_hat)] = row.get(y_name(k_hat), 0.0) - 1.0
        for h in decomposition.open_depots:
            row[y_name(h)] = row.get(y_name(h), 0.0) - 1.0
        cuts.append(CutRecord(DEPOT_CONNECTIVITY_VI, tuple(rooted), row, ">=", -float(instance.n_d), iteration, k_hat))
    return cuts


# ---------------------------------------------------------------------------
# driver


@dataclass
class MpOutcome:
    result: MilpResult
    solution: NetworkSolution | None
    cuts: list[CutRecord] = field(default_factory=list)
    master: MasterModel | None = None


def solve_mp(instance: Instance, limits: Limits | None = None) -> MpOutcome:
    """Branch and cut on the master model with lazily separated cuts."""
    master = build_mp(instance)
    model, vm = master.model, master.variables
    log: list[CutRecord] = []
    seen: set[tuple] = set()
    calls = 0

    def callback(values):
        nonlocal calls
        calls += 1
        named = candidate_values(master, values)
        arcs = [a for a, j in vm.x.items() if values[j] > 0.5]
        selected = [i for i, j in vm.y.items() if values[j] > 0.5]
        decomp = decompose_candidate(instance, arcs, selected)
        if decomp.depot_free:
            found = separate_connectivity(instance, decomp, calls)
        else:
            found = []
            for comp in decomp.components:
                if len(comp.depots) != 1 or not comp.is_tree:
                    raise AssertionError(f"candidate component {comp.nodes} is not a single-depot tree")
                found += separate_capacity(instance, comp, calls)
        fresh = []
        for cut in found:
            cut.candidate_activity = cut.activity(named)
            if not cut.is_violated(named):
                raise AssertionError(f"{cut.kind} cut on {cut.nodes} does not cut off its candidate")
            if cut.key in seen:
                continue
            seen.add(cut.key)
            fresh.append(cut)
        if found and not fresh:
            raise AssertionError("infeasible candidate but every separated cut is already present")
        rows = [
            Constraint({model.index(n): c for n, c in cut.coefs.items()}, cut.sense, cut.rhs,
                       f"{cut.kind}#{len(log) + t}")
            for t, cut in enumerate(fresh)
        ]
        log.extend(fresh)
        return rows

    result = milp_solve(model, callback, limits)
    if result.status == "infeasible":
        raise InfeasibleError(_infeasibility_reason(instance))
    sol = None if result.x is None else solution_from_values(instance, vm, result.x)
    return MpOutcome(result, sol, log, master)
