"""Road-traffic savings and per-package cost of a tunnel network."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

from .formulation import NetworkSolution
from .instance import Instance, distances_from

TOTES_PER_TRUCK = 960
PACKAGES_PER_VAN = 350
TRUCK_CO2_G_PER_MILE = 1700.0
VAN_CO2_G_PER_MILE = 248.0


@dataclass
class HubSavings:
    trucks: int
    truck_miles: float
    truck_co2_g: float
    vans: int
    van_miles: float
    van_co2_g: float


@dataclass
class SavingsReport:
    per_hub: dict[str, HubSavings]
    trucks: int
    truck_miles: float
    truck_co2_g: float
    vans: int
    van_miles: float
    van_co2_g: float
    percent_served: float

    def to_json(self) -> dict:
        out = asdict(self)
        out["per_hub"] = {k: asdict(v) for k, v in sorted(self.per_hub.items())}
        return out


def hub_savings(demand: int, depot_miles: float) -> HubSavings:
    trucks = math.ceil(demand / TOTES_PER_TRUCK)
    vans = math.ceil(demand / PACKAGES_PER_VAN)
    truck_miles = trucks * 2 * depot_miles
    van_miles = vans * 2 * depot_miles
    return HubSavings(trucks, truck_miles, truck_miles * TRUCK_CO2_G_PER_MILE,
                      vans, van_miles, van_miles * VAN_CO2_G_PER_MILE)


def percent_served(instance: Instance, solution: NetworkSolution | None) -> float:
    total = instance.total_demand
    if solution is None or total == 0:
        return 0.0
    return 100.0 * solution.objective / total


def depot_road_miles(instance: Instance, solution: NetworkSolution) -> dict[str, float]:
    """Shortest candidate-arc distance from each served hub's own depot."""
    owner = solution.depot_of()
    cache = {h: distances_from(instance, h) for h in solution.depots}
    return {m: cache[owner[m]][m] for m in solution.served if m in owner and m in cache[owner[m]]}


def savings(instance: Instance, solution: NetworkSolution | None,
            depot_distances: dict[str, float] | None = None) -> SavingsReport:
    """Truck and van trips, miles and CO2 avoided by serving hubs through tunnels."""
    served = [] if solution is None else solution.served
    if depot_distances is None and solution is not None:
        depot_distances = depot_road_miles(instance, solution)
    per_hub = {}
    for m in served:
        if depot_distances is None or m not in depot_distances:
            raise KeyError(f"no depot distance for served microhub {m}")
        per_hub[m] = hub_savings(instance.demand[m], depot_distances[m])
    vals = list(per_hub.values())
    return SavingsReport(
        per_hub,
        trucks=sum(v.trucks for v in vals),
        truck_miles=sum(v.truck_miles for v in vals),
        truck_co2_g=sum(v.truck_co2_g for v in vals),
        vans=sum(v.vans for v in vals),
        van_miles=sum(v.van_miles for v in vals),
        van_co2_g=sum(v.van_co2_g for v in vals),
        percent_served=percent_served(instance, solution),
    )


# ---------------------------------------------------------------------------
# cost model


@dataclass
class CostParams:
    carriage_cost: float = 1172.0
    rail_construction_per_mile: float = 1_714_438.0
    design_per_mile: float = 455_685.0
    motors_system_per_mile: float = 2_243_686.0
    interest_rate: float = 0.08
    depreciation_years: float = 12.0
    insurance_rate: float = 0.005
    track_power_kw_per_mile: float = 27.35
    carriage_power_kw: float = 0.8
    energy_cost_per_kwh: float = 0.14
    wheel_service_cost: float = 25.40
    wheel_service_miles: float = 62_137.0
    maintenance_actions_per_hour: float = 6.0
    entry_rate_per_second: float = 11.0
    loader_seconds_per_carriage: float = 15.0
    units_per_operator: int = 5
    operator_wage: float = 22.0
    engineer_wage: float = 67.0
    engineers: int = 30
    shifts_per_day: int = 3
    shift_hours: float = 8.0
    work_days_per_month: int = 20
    loader_opex_per_unit: float = 127_000.0
    warehouse_cost_per_sqft: float = 11.96
    warehouse_sqft: float = 322_909.0
    microhub_sqft: float = 750.0
    last_meter_per_package: float = 2.828
    loading_windows: int = 4
    headway_seconds: float = 0.05

    @property
    def hours_per_person_year(self) -> float:
        return self.shift_hours * self.work_days_per_month * 12

    @classmethod
    def from_json(cls, data: dict) -> "CostParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown cost parameters: {sorted(unknown)}")
        params = cls(**data)
        for f in fields(cls):
            if getattr(params, f.name) <= 0:
                raise ValueError(f"cost parameter {f.name} must be positive")
        return params


@dataclass
class CostBreakdown:
    fixed: float
    energy: float
    maintenance: float
    staff: float
    loading_unloading: float
    uft_subtotal: float
    last_meter: float
    total: float
    # intermediates
    carriages: int
    capex: float
    both_direction_miles: float
    annual_fixed: float
    kwh_per_day: float
    operational_hours_per_day: float
    loading_units: int
    loading_operators: int
    maintenance_operators: int
    people: int
    staff_cost_per_year: float
    loader_warehouse_per_package: float
    microhub_per_package: float

    def to_json(self) -> dict:
        return asdict(self)


def cost_breakdown(params: CostParams, packages_per_day: float, one_way_tunnel_miles: float,
                   served_microhub_count: int, farthest_travel_hours: float) -> CostBreakdown:
    """Per-package cost of building and running the network, by component."""
    if packages_per_day <= 0:
        raise ValueError("no packages served: per-package cost is undefined")
    if params.loading_windows <= 0:
        raise ValueError("loading_windows must be positive")
    if one_way_tunnel_miles <= 0 or farthest_travel_hours < 0 or served_microhub_count < 0:
        raise ValueError("tunnel miles must be positive and counts nonnegative")
    p = params
    annual_packages = packages_per_day * 365
    both = 2 * one_way_tunnel_miles

    carriages = math.ceil(packages_per_day / p.loading_windows)
    per_mile = p.rail_construction_per_mile + p.design_per_mile + p.motors_system_per_mile
    capex = carriages * p.carriage_cost + both * per_mile
    rate = p.interest_rate + 1 / p.depreciation_years + p.insurance_rate
    annual_fixed = (capex / both) * rate * both
    fixed = annual_fixed / annual_packages

    loading_hours = carriages * p.headway_seconds / 3600
    op_hours = p.loading_windows * (loading_hours + 2 * farthest_travel_hours)
    kwh = (p.track_power_kw_per_mile * both + p.carriage_power_kw * carriages) * op_hours
    energy = kwh * p.energy_cost_per_kwh / packages_per_day

    maintenance = p.wheel_service_cost / p.wheel_service_miles * both

    units = math.ceil(p.entry_rate_per_second * p.loader_seconds_per_carriage)
    loading_ops = (math.ceil(units / p.units_per_operator) + served_microhub_count) * p.shifts_per_day
    actions_per_carriage = both * 365 / (p.wheel_service_miles * carriages)
    actions_per_person = p.maintenance_actions_per_hour * p.hours_per_person_year
    maint_ops = math.ceil(actions_per_carriage * carriages / actions_per_person)
    people = loading_ops + maint_ops + p.engineers
    staff_year = ((loading_ops + maint_ops) * p.hours_per_person_year * p.operator_wage
                  + p.engineers * p.hours_per_person_year * p.engineer_wage)
    staff = staff_year / annual_packages

    loader_warehouse = (units * p.loader_opex_per_unit + p.warehouse_sqft * p.warehouse_cost_per_sqft) / annual_packages
    microhubs = served_microhub_count * p.microhub_sqft * p.warehouse_cost_per_sqft / annual_packages
    loading_unloading = loader_warehouse + microhubs

    subtotal = fixed + energy + maintenance + staff + loading_unloading
    return CostBreakdown(
        fixed=fixed, energy=energy, maintenance=maintenance, staff=staff,
        loading_unloading=loading_unloading, uft_subtotal=subtotal,
        last_meter=p.last_meter_per_package, total=subtotal + p.last_meter_per_package,
        carriages=carriages, capex=capex, both_direction_miles=both, annual_fixed=annual_fixed,
        kwh_per_day=kwh, operational_hours_per_day=op_hours, loading_units=units,
        loading_operators=loading_ops, maintenance_operators=maint_ops, people=people,
        staff_cost_per_year=staff_year, loader_warehouse_per_package=loader_warehouse,
        microhub_per_package=microhubs,
    )


def farthest_travel_hours(instance: Instance, solution: NetworkSolution, speed_mph: float) -> float:
    """Longest in-tunnel path from a depot to one of its hubs, at ``speed_mph``."""
    if speed_mph <= 0:
        raise ValueError("speed must be positive")
    depth = {h: 0.0 for h in solution.depots}
    for h, arcs in solution.trees().items():
        pending = list(arcs)
        while pending:
            rest = []
            for i, j in pending:
                if i in depth:
                    depth[j] = depth[i] + instance.distance[(i, j)]
                else:
                    rest.append((i, j))
            if len(rest) == len(pending):
                break
            pending = rest
    return max(depth.values(), default=0.0) / speed_mph


DEFAULT_SPEED_MPH = 30.0


def solution_cost(instance: Instance, solution: NetworkSolution, params: CostParams | None = None,
                  speed_mph: float = DEFAULT_SPEED_MPH) -> CostBreakdown:
    params = params or CostParams()
    return cost_breakdown(params, solution.objective, solution.length(instance), len(solution.served),
                          farthest_travel_hours(instance, solution, speed_mph))


TABLE_ROWS = [
    ("Number of Carriages", "carriages", "{:,.0f}"),
    ("Route Length (both directions)", "both_direction_miles", "{:,.1f}"),
    ("CAPEX", "capex", "${:,.0f}"),
    ("Fixed Cost per Package", "fixed", "${:.3f}"),
    ("Power (kWh/day)", "kwh_per_day", "{:,.0f}"),
    ("Cost of Energy per Package", "energy", "${:.3f}"),
    ("Carriage Maintenance", "maintenance", "${:.3f}"),
    ("Maintenance Operators", "maintenance_operators", "{:,.0f}"),
    ("Loading/Unloading Units", "loading_units", "{:,.0f}"),
    ("Loading/Unloading Operators", "loading_operators", "{:,.0f}"),
    ("Total People Needed", "people", "{:,.0f}"),
    ("Cost of people per package", "staff", "${:.3f}"),
    ("Warehouse Cost per package", "loader_warehouse_per_package", "${:.3f}"),
    ("Microhub Cost per package", "microhub_per_package", "${:.4f}"),
    ("Cost per Package of UFT Delivery", "uft_subtotal", "${:.3f}"),
    ("Cost of Cargo bike", "last_meter", "${:.3f}"),
    ("Cost per package", "total", "${:.3f}"),
]


def format_cost_table(cost: CostBreakdown) -> str:
    width = max(len(label) for label, *_ in TABLE_ROWS)
    lines = [f"{label:<{width}}  {fmt.format(getattr(cost, attr)):>16}" for label, attr, fmt in TABLE_ROWS]
    return "\n".join(lines)
