import json

import pytest

from helpers import t1
from uftnet.analytics import (
    CostParams,
    cost_breakdown,
    farthest_travel_hours,
    format_cost_table,
    hub_savings,
    percent_served,
    savings,
    solution_cost,
)
from uftnet.formulation import NetworkSolution, solve_mip
from uftnet.instance import make_instance


def table8():
    return cost_breakdown(CostParams(), 373_428, 150, 114, 1.27)


def test_truck_example():
    s = hub_savings(960, 10)
    assert (s.trucks, s.truck_miles, s.truck_co2_g) == (1, 20, 34_000)


def test_truck_ceiling():
    assert hub_savings(961, 1).trucks == 2


def test_van_example():
    s = hub_savings(350, 5)
    assert (s.vans, s.van_miles, s.van_co2_g) == (1, 10, 2_480)


def test_savings_totals_sum_hubs():
    inst = t1(3)
    sol = solve_mip(inst).solution
    rep = savings(inst, sol)
    assert set(rep.per_hub) == {"a", "c"}
    # shortest candidate-arc distance from h: a = 1, c = 2
    assert rep.per_hub["a"].truck_miles == 2 and rep.per_hub["c"].truck_miles == 4
    assert rep.truck_miles == sum(h.truck_miles for h in rep.per_hub.values())
    assert rep.van_co2_g == sum(h.van_co2_g for h in rep.per_hub.values())


def test_savings_missing_distance_names_hub():
    inst = t1(3)
    sol = solve_mip(inst).solution
    with pytest.raises(KeyError, match="c"):
        savings(inst, sol, depot_distances={"a": 1.0})


def test_savings_monotone_in_served_set():
    inst = t1(10)
    small = NetworkSolution(["h"], ["a"], [("h", "a")], {"h": 5}, 5)
    big = NetworkSolution(["h"], ["a", "b"], [("a", "b"), ("h", "a")], {"h": 8}, 8)
    s, b = savings(inst, small), savings(inst, big)
    for field in ("trucks", "truck_miles", "truck_co2_g", "vans", "van_miles", "van_co2_g"):
        assert getattr(b, field) >= getattr(s, field)


def test_percent_served():
    inst = t1(2)
    assert percent_served(inst, solve_mip(inst).solution) == pytest.approx(100 * 8 / 12)
    assert percent_served(inst, None) == 0
    assert percent_served(t1(10), solve_mip(t1(10)).solution) == 100


def test_table8_counts():
    c = table8()
    assert c.carriages == 93_357
    assert c.loading_units == 165
    assert c.people == 472


def test_table8_per_package():
    c = table8()
    assert c.fixed == pytest.approx(1.770, abs=0.005)
    assert c.energy == pytest.approx(0.478, abs=0.005)
    assert c.maintenance == pytest.approx(0.123, abs=0.001)
    assert c.staff == pytest.approx(0.165, abs=0.005)
    assert c.loading_unloading == pytest.approx(0.182, abs=0.02)
    assert c.uft_subtotal == pytest.approx(2.726, abs=0.02)
    assert c.total == pytest.approx(5.553, abs=0.02)


def test_table8_energy_is_close_to_quoted_kwh():
    # the quoted 1,275,030 kWh uses an operating-hours figure that does not
    # match its own inputs; the formula lands about 0.23% lower
    assert table8().kwh_per_day == pytest.approx(1_275_030, rel=0.003)


def test_cost_sums_to_the_cent():
    c = table8()
    parts = c.fixed + c.energy + c.maintenance + c.staff + c.loading_unloading
    assert round(parts, 2) == round(c.uft_subtotal, 2)
    assert round(c.uft_subtotal + c.last_meter, 2) == round(c.total, 2)


@pytest.mark.parametrize("w", [1, 2, 3, 4, 6, 12])
def test_windows_only_change_carriage_capex(w):
    base = cost_breakdown(CostParams(loading_windows=1), 360_000, 150, 100, 1.0)
    c = cost_breakdown(CostParams(loading_windows=w), 360_000, 150, 100, 1.0)
    assert c.carriages * w == 360_000
    rate = 0.08 + 1 / 12 + 0.005
    delta = (base.carriages - c.carriages) * 1172 * rate / (360_000 * 365)
    assert base.fixed - c.fixed == pytest.approx(delta)


def test_cost_errors():
    with pytest.raises(ValueError, match="no packages served"):
        cost_breakdown(CostParams(), 0, 150, 1, 1.0)
    with pytest.raises(ValueError):
        cost_breakdown(CostParams(loading_windows=0), 10, 150, 1, 1.0)


def test_cost_params_from_json():
    assert CostParams.from_json({}) == CostParams()
    assert CostParams.from_json({"energy_cost_per_kwh": 0.2}).energy_cost_per_kwh == 0.2
    with pytest.raises(ValueError, match="unknown"):
        CostParams.from_json({"bogus": 1})
    with pytest.raises(ValueError, match="positive"):
        CostParams.from_json({"engineers": 0})


def test_farthest_travel_and_solution_cost():
    inst = make_instance("f", ["h"], {"a": 100, "b": 50}, [("h", "a", 3), ("a", "b", 6)], budget=9, p_max=1000)
    sol = solve_mip(inst).solution
    assert farthest_travel_hours(inst, sol, 30) == pytest.approx(9 / 30)
    c = solution_cost(inst, sol)
    assert c.both_direction_miles == 18 and c.carriages == 38


def test_table_layout():
    text = format_cost_table(table8())
    lines = text.splitlines()
    assert lines[0].startswith("Number of Carriages") and "93,357" in lines[0]
    assert lines[-1].startswith("Cost per package") and "$5.553" in lines[-1]
    assert len({len(line) for line in lines}) == 1


def test_reports_serialize():
    inst = t1(3)
    sol = solve_mip(inst).solution
    json.dumps(savings(inst, sol).to_json())
    json.dumps(table8().to_json())
