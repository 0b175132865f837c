"""Problem data for underground freight network design.

An instance holds candidate depots, microhubs with daily package demand,
undirected candidate tunnel links with lengths in miles, and the design
parameters (number of depots to open, tunnel budget, depot loading capacity).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

DEPOT = "depot"
MICROHUB = "microhub"

BUDGET_TOL = 1e-9


class InvalidInstanceError(ValueError):
    """Raised when an operation needs a valid instance and gets a broken one."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid instance: " + "; ".join(self.violations))


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    demand: int = 0
    position: tuple[float, float] | None = None

    @property
    def is_depot(self) -> bool:
        return self.kind == DEPOT


@dataclass(frozen=True)
class CandidateArc:
    a: str
    b: str
    distance: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


def compute_p_max(loading_time_hours: float, headway_seconds: float) -> int:
    """Packages one depot can load in a window: floor(T * 3600 / tau).

    Decimal inputs are converted exactly, so 12 h at 0.05 s gives 864000
    rather than a float rounding artefact.
    """
    if loading_time_hours <= 0 or headway_seconds <= 0:
        raise ValueError("loading time and headway must be positive")
    t = Fraction(str(loading_time_hours))
    tau = Fraction(str(headway_seconds))
    return math.floor(t * 3600 / tau)


@dataclass(frozen=True)
class Params:
    n_d: int
    budget_miles: float
    loading_time_hours: float | None = None
    headway_seconds: float | None = None
    p_max: int | None = None

    def __post_init__(self):
        if self.p_max is None and self.loading_time_hours and self.headway_seconds:
            if self.loading_time_hours > 0 and self.headway_seconds > 0:
                object.__setattr__(
                    self, "p_max", compute_p_max(self.loading_time_hours, self.headway_seconds)
                )

    def with_budget(self, budget_miles: float) -> "Params":
        return Params(self.n_d, budget_miles, self.loading_time_hours, self.headway_seconds, self.p_max)


@dataclass(frozen=True)
class DirectedArc:
    tail: str
    head: str
    distance: float


@dataclass(frozen=True)
class Instance:
    name: str
    nodes: tuple[Node, ...]
    arcs: tuple[CandidateArc, ...]
    params: Params

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", tuple(self.arcs))

    @cached_property
    def node(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def depots(self) -> list[str]:
        return sorted(n.id for n in self.nodes if n.kind == DEPOT)

    @cached_property
    def microhubs(self) -> list[str]:
        return sorted(n.id for n in self.nodes if n.kind == MICROHUB)

    @cached_property
    def demand(self) -> dict[str, int]:
        return {n.id: n.demand for n in self.nodes}

    @cached_property
    def total_demand(self) -> int:
        return sum(self.demand[m] for m in self.microhubs)

    @cached_property
    def distance(self) -> dict[tuple[str, str], float]:
        """Arc length keyed by both orientations."""
        d = {}
        for arc in self.arcs:
            d[(arc.a, arc.b)] = arc.distance
            d[(arc.b, arc.a)] = arc.distance
        return d

    @cached_property
    def neighbors(self) -> dict[str, list[str]]:
        nb: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for arc in self.arcs:
            nb.setdefault(arc.a, []).append(arc.b)
            nb.setdefault(arc.b, []).append(arc.a)
        return {k: sorted(v) for k, v in nb.items()}

    @property
    def n_d(self) -> int:
        return self.params.n_d

    @property
    def p_max(self) -> int:
        return self.params.p_max

    @property
    def budget(self) -> float:
        return self.params.budget_miles

    def is_depot(self, node_id: str) -> bool:
        return self.node[node_id].kind == DEPOT

    def replace(self, *, params: Params | None = None, nodes=None, arcs=None, name=None) -> "Instance":
        return Instance(
            name=self.name if name is None else name,
            nodes=self.nodes if nodes is None else nodes,
            arcs=self.arcs if arcs is None else arcs,
            params=self.params if params is None else params,
        )

    def with_budget(self, budget_miles: float) -> "Instance":
        return self.replace(params=self.params.with_budget(budget_miles))


def validate(instance: Instance) -> list[str]:
    """Return every invariant violation, ordered by the offending id."""
    found: list[tuple[str, str]] = []
    ids = [n.id for n in instance.nodes]
    seen: set[str] = set()
    for nid in ids:
        if nid in seen:
            found.append((nid, f"duplicate node id {nid}"))
        seen.add(nid)

    for n in instance.nodes:
        if n.kind not in (DEPOT, MICROHUB):
            found.append((n.id, f"node {n.id} has unknown kind {n.kind!r}"))
        elif n.kind == DEPOT and n.demand != 0:
            found.append((n.id, f"depot {n.id} demand must be 0"))
        elif n.kind == MICROHUB and n.demand < 0:
            found.append((n.id, f"microhub {n.id} demand must be nonnegative"))
        if int(n.demand) != n.demand:
            found.append((n.id, f"node {n.id} demand must be an integer"))

    kinds = {n.id: n.kind for n in instance.nodes}
    pairs: set[tuple[str, str]] = set()
    for arc in instance.arcs:
        key = arc.key
        label = f"{arc.a}-{arc.b}"
        if arc.a == arc.b:
            found.append((arc.a, f"self-loop at {arc.a}"))
            continue
        for end in (arc.a, arc.b):
            if end not in kinds:
                found.append((end, f"arc {label} endpoint {end} does not exist"))
        if key in pairs:
            found.append((key[0], f"duplicate arc {key[0]}-{key[1]}"))
        pairs.add(key)
        if not (math.isfinite(arc.distance) and arc.distance > 0):
            found.append((key[0], f"arc {label} distance must be finite and positive"))
        if kinds.get(arc.a) == DEPOT and kinds.get(arc.b) == DEPOT:
            found.append((key[0], f"arc {label} joins two depots"))

    p = instance.params
    n_depots = sum(1 for k in kinds.values() if k == DEPOT)
    n_hubs = sum(1 for k in kinds.values() if k == MICROHUB)
    if n_depots < 1:
        found.append(("", "instance needs at least one depot"))
    if n_hubs < 1:
        found.append(("", "instance needs at least one microhub"))
    if p.n_d < 1:
        found.append(("", "n_d must be at least 1"))
    elif p.n_d > n_depots:
        found.append(("", f"n_d={p.n_d} exceeds the {n_depots} candidate depots"))
    if not (p.budget_miles >= 0 and math.isfinite(p.budget_miles)):
        found.append(("", "budget must be finite and nonnegative"))
    if p.p_max is None:
        found.append(("", "p_max missing (give p_max or loading time and headway)"))
    elif p.p_max < 0:
        found.append(("", "p_max must be nonnegative"))
    if p.loading_time_hours is not None or p.headway_seconds is not None:
        if not (p.loading_time_hours and p.headway_seconds and p.loading_time_hours > 0 and p.headway_seconds > 0):
            found.append(("", "loading time and headway must both be positive"))
        elif p.p_max is not None and p.p_max != compute_p_max(p.loading_time_hours, p.headway_seconds):
            found.append(("", "p_max disagrees with loading time / headway"))

    found.sort(key=lambda t: t[0])
    return [msg for _, msg in found]


def require_valid(instance: Instance) -> None:
    problems = validate(instance)
    if problems:
        raise InvalidInstanceError(problems)


def expand_directed(instance: Instance) -> tuple[DirectedArc, ...]:
    """Both orientations of every candidate arc, in arc order."""
    require_valid(instance)
    out = []
    for arc in instance.arcs:
        out.append(DirectedArc(arc.a, arc.b, arc.distance))
        out.append(DirectedArc(arc.b, arc.a, arc.distance))
    return tuple(out)


def shortest_path(instance: Instance, source: str, target: str) -> tuple[float, list[str]] | None:
    """Dijkstra over candidate arcs; None when ``target`` is unreachable.

    Among equal-length paths the lexicographically smallest id sequence wins.
    """
    if source not in instance.node or target not in instance.node:
        raise KeyError(source if source not in instance.node else target)
    heap = [(0.0, [source])]
    done: set[str] = set()
    nb = instance.neighbors
    while heap:
        dist, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        if u == target:
            return dist, path
        done.add(u)
        for v in nb.get(u, ()):
            if v not in done:
                heapq.heappush(heap, (dist + instance.distance[(u, v)], path + [v]))
    return None


def shortest_path_miles(instance: Instance, source: str, target: str) -> float | None:
    found = shortest_path(instance, source, target)
    return None if found is None else found[0]


def distances_from(instance: Instance, source: str) -> dict[str, float]:
    """Single-source shortest distances to every reachable node."""
    dist = {source: 0.0}
    heap = [(0.0, source)]
    nb = instance.neighbors
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        for v in nb.get(u, ()):
            nd = d + instance.distance[(u, v)]
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


# ---------------------------------------------------------------------------
# synthetic cities


@dataclass
class Zone:
    """A demand zone (think zip code) covering some grid cells.

    ``cells`` may be empty, in which case the zone's demand goes to the
    microhub nearest ``centroid``.
    """

    population: int
    cells: list[tuple[int, int]] = field(default_factory=list)
    centroid: tuple[float, float] | None = None


def hub_id(row: int, col: int) -> str:
    return f"m{row:02d}{col:02d}"


def _split_demand(total: int, hubs: Sequence[str]) -> dict[str, int]:
    k = len(hubs)
    each = math.floor(total / k + 0.5)
    rest = total - each * k
    ordered = sorted(hubs)
    if each + rest < 0:
        each, rest = total // k, total % k
    out = {h: each for h in ordered}
    out[ordered[0]] += rest
    return out


def block_zones(rows: int, cols: int, block: int, populations: Sequence[int]) -> list[Zone]:
    """Partition the grid into ``block`` x ``block`` squares, one zone each."""
    zones = []
    it = iter(populations)
    for r0 in range(0, rows, block):
        for c0 in range(0, cols, block):
            cells = [(r, c) for r in range(r0, min(r0 + block, rows)) for c in range(c0, min(c0 + block, cols))]
            zones.append(Zone(population=next(it), cells=cells))
    return zones


def generate_grid_city(
    rows: int,
    cols: int,
    spacing_miles: float = 1.5,
    depot_positions: Sequence[tuple[float, float]] | None = None,
    zones: Sequence[Zone] | None = None,
    demand_pct: float = 0.15,
    seed: int = 0,
    *,
    n_d: int = 1,
    budget_miles: float = 15.0,
    loading_time_hours: float | None = 12.0,
    headway_seconds: float | None = 0.05,
    p_max: int | None = None,
    depot_degree: int = 3,
    zone_block: int = 2,
    population_range: tuple[int, int] = (5_000, 40_000),
    name: str | None = None,
) -> Instance:
    """Build a synthetic city: microhubs on a grid, depots on the perimeter.

    Links join 4-neighbours with length ``spacing * U[1.0, 1.3]`` to mimic road
    detours. Each depot links to its ``depot_degree`` nearest microhubs. Zone
    demand is ``demand_pct * population`` split evenly over the zone's hubs.
    When ``zones`` is omitted, square blocks of ``zone_block`` cells get seeded
    random populations.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid must have at least one row and one column")
    if not (0 < demand_pct <= 1):
        raise ValueError("demand_pct must be in (0, 1]")
    rng = np.random.default_rng(seed)
    if zones is None:
        n_blocks = math.ceil(rows / zone_block) * math.ceil(cols / zone_block)
        pops = rng.integers(population_range[0], population_range[1] + 1, size=n_blocks)
        zones = block_zones(rows, cols, zone_block, [int(p) for p in pops])
    if not zones:
        raise ValueError("at least one zone is required")
    if depot_positions is None:
        depot_positions = [(-spacing_miles, (rows - 1) * spacing_miles / 2)]

    pos = {hub_id(r, c): (c * spacing_miles, r * spacing_miles) for r in range(rows) for c in range(cols)}
    demand = dict.fromkeys(pos, 0)
    covered: set[tuple[int, int]] = set()
    for zone in zones:
        total = math.floor(demand_pct * zone.population + 0.5)
        if zone.cells:
            for cell in zone.cells:
                if not (0 <= cell[0] < rows and 0 <= cell[1] < cols):
                    raise ValueError(f"zone cell {cell} outside the grid")
                if cell in covered:
                    raise ValueError(f"grid cell {cell} belongs to more than one zone")
                covered.add(cell)
            for h, d in _split_demand(total, [hub_id(r, c) for r, c in zone.cells]).items():
                demand[h] += d
        else:
            if zone.centroid is None:
                raise ValueError("a zone without cells needs a centroid")
            cx, cy = zone.centroid
            nearest = min(sorted(pos), key=lambda h: math.hypot(pos[h][0] - cx, pos[h][1] - cy))
            demand[nearest] += total

    nodes = []
    for i, (x, y) in enumerate(depot_positions):
        nodes.append(Node(f"h{i}", DEPOT, 0, (float(x), float(y))))
    for h in sorted(pos):
        nodes.append(Node(h, MICROHUB, int(demand[h]), pos[h]))

    arcs = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                arcs.append(CandidateArc(hub_id(r, c), hub_id(r, c + 1), float(spacing_miles * rng.uniform(1.0, 1.3))))
            if r + 1 < rows:
                arcs.append(CandidateArc(hub_id(r, c), hub_id(r + 1, c), float(spacing_miles * rng.uniform(1.0, 1.3))))
    for i, (x, y) in enumerate(depot_positions):
        near = sorted(pos, key=lambda h: (math.hypot(pos[h][0] - x, pos[h][1] - y), h))[:depot_degree]
        for h in near:
            crow = math.hypot(pos[h][0] - x, pos[h][1] - y)
            arcs.append(CandidateArc(f"h{i}", h, float(max(crow, 1e-3) * rng.uniform(1.0, 1.3))))

    params = Params(
        n_d=n_d,
        budget_miles=budget_miles,
        loading_time_hours=None if p_max is not None else loading_time_hours,
        headway_seconds=None if p_max is not None else headway_seconds,
        p_max=p_max,
    )
    inst = Instance(name or f"grid{rows}x{cols}-s{seed}", tuple(nodes), tuple(arcs), params)
    require_valid(inst)
    return inst


def make_instance(
    name: str,
    depots: Iterable[str],
    demands: Mapping[str, int],
    arcs: Iterable[tuple[str, str, float]],
    *,
    n_d: int = 1,
    budget: float,
    p_max: int,
) -> Instance:
    """Compact constructor used by tests and demos."""
    nodes = [Node(h, DEPOT, 0) for h in depots] + [Node(m, MICROHUB, int(p)) for m, p in demands.items()]
    return Instance(
        name,
        tuple(nodes),
        tuple(CandidateArc(a, b, float(d)) for a, b, d in arcs),
        Params(n_d=n_d, budget_miles=budget, p_max=p_max),
    )
