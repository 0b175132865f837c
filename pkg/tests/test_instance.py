import pytest
from hypothesis import given, strategies as st

from uftnet.instance import (
    CandidateArc,
    InvalidInstanceError,
    Node,
    Params,
    Zone,
    compute_p_max,
    expand_directed,
    generate_grid_city,
    make_instance,
    shortest_path,
    shortest_path_miles,
    validate,
)


def small(arcs=(("h", "a", 1), ("a", "b", 1), ("b", "c", 1)), **kw):
    return make_instance("s", ["h"], {"a": 1, "b": 2, "c": 3}, arcs, budget=kw.get("budget", 5), p_max=100)


def test_validate_well_formed():
    assert validate(small()) == []


def test_validate_depot_demand():
    inst = small()
    nodes = tuple(Node(n.id, n.kind, 7) if n.id == "h" else n for n in inst.nodes)
    assert validate(inst.replace(nodes=nodes)) == ["depot h demand must be 0"]


def test_validate_self_loop():
    inst = small(arcs=[("h", "a", 1), ("a", "a", 2)])
    assert validate(inst) == ["self-loop at a"]


def test_validate_reports_everything_sorted():
    inst = make_instance("bad", ["h"], {"a": 1, "b": -2}, [("h", "a", 1), ("a", "h", 2), ("a", "z", 0)],
                         n_d=2, budget=-1, p_max=10)
    problems = validate(inst)
    assert "duplicate arc a-h" in problems
    assert "arc a-z endpoint z does not exist" in problems
    assert "arc a-z distance must be finite and positive" in problems
    assert "microhub b demand must be nonnegative" in problems
    assert "n_d=2 exceeds the 1 candidate depots" in problems
    assert "budget must be finite and nonnegative" in problems
    assert validate(inst) == problems


def test_validate_rejects_depot_to_depot_arc():
    inst = make_instance("dd", ["h1", "h2"], {"a": 1}, [("h1", "a", 1), ("h1", "h2", 1)], budget=3, p_max=5)
    assert validate(inst) == ["arc h1-h2 joins two depots"]


def test_validate_p_max_consistency():
    inst = small()
    bad = inst.replace(params=Params(1, 5.0, loading_time_hours=12, headway_seconds=0.05, p_max=5))
    assert validate(bad) == ["p_max disagrees with loading time / headway"]


def test_expand_directed_single_arc():
    inst = small(arcs=[("h", "a", 1.5)])
    got = {(a.tail, a.head, a.distance) for a in expand_directed(inst)}
    assert got == {("h", "a", 1.5), ("a", "h", 1.5)}


def test_expand_directed_empty_and_count():
    assert expand_directed(small(arcs=[])) == ()
    four = small(arcs=[("h", "a", 1), ("a", "b", 1), ("b", "c", 1), ("h", "c", 4)])
    assert len(expand_directed(four)) == 8


def test_expand_directed_collapses_back():
    inst = small(arcs=[("h", "a", 1), ("a", "b", 2.5), ("c", "b", 1)])
    collapsed = {(tuple(sorted((a.tail, a.head))), a.distance) for a in expand_directed(inst)}
    assert collapsed == {(arc.key, arc.distance) for arc in inst.arcs}


def test_expand_directed_rejects_invalid():
    with pytest.raises(InvalidInstanceError):
        expand_directed(small(arcs=[("a", "a", 1)]))


@pytest.mark.parametrize("T, tau, expected", [(12, 0.05, 864_000), (1, 3600, 1), (3, 0.05, 216_000)])
def test_compute_p_max(T, tau, expected):
    assert compute_p_max(T, tau) == expected


@pytest.mark.parametrize("T, tau", [(0, 1), (1, 0), (-1, 1)])
def test_compute_p_max_rejects_nonpositive(T, tau):
    with pytest.raises(ValueError):
        compute_p_max(T, tau)


@given(st.floats(0.1, 24), st.floats(0.1, 24), st.floats(0.01, 10))
def test_p_max_monotone_in_loading_time(t1, t2, tau):
    lo, hi = sorted((t1, t2))
    assert compute_p_max(lo, tau) <= compute_p_max(hi, tau)


@given(st.floats(0.1, 24), st.floats(0.01, 10), st.floats(0.01, 10))
def test_p_max_antitone_in_headway(t, a, b):
    lo, hi = sorted((a, b))
    assert compute_p_max(t, lo) >= compute_p_max(t, hi)


def test_params_derive_p_max():
    assert Params(1, 10.0, loading_time_hours=12, headway_seconds=0.05).p_max == 864_000


def test_grid_city_single_zone_demand():
    inst = generate_grid_city(2, 2, 1.5, zones=[Zone(4000, [(0, 0), (0, 1), (1, 0), (1, 1)])], demand_pct=0.15)
    assert [inst.demand[m] for m in inst.microhubs] == [150, 150, 150, 150]


def test_grid_city_zone_without_hub_goes_to_nearest():
    zones = [Zone(4000, [(0, 0), (0, 1), (1, 0), (1, 1)]), Zone(1000, [], centroid=(1.6, 1.4))]
    inst = generate_grid_city(2, 2, 1.5, zones=zones, demand_pct=0.10)
    assert inst.demand["m0101"] == 100 + 100
    assert sum(inst.demand[m] for m in inst.microhubs) == 500


def test_grid_city_remainder_to_lowest_id():
    inst = generate_grid_city(1, 3, zones=[Zone(1001, [(0, 0), (0, 1), (0, 2)])], demand_pct=0.1)
    # 100 over three hubs: 33 each, remainder 1 to the lowest id
    assert [inst.demand[m] for m in inst.microhubs] == [34, 33, 33]


def test_grid_city_deterministic():
    a = generate_grid_city(3, 3, seed=11)
    b = generate_grid_city(3, 3, seed=11)
    c = generate_grid_city(3, 3, seed=12)
    assert a == b
    assert a != c


def test_grid_city_structure():
    inst = generate_grid_city(3, 4, spacing_miles=1.5, seed=3, depot_degree=3)
    assert len(inst.microhubs) == 12 and inst.depots == ["h0"]
    hub_arcs = [a for a in inst.arcs if "h0" not in (a.a, a.b)]
    assert len(hub_arcs) == 3 * 3 + 2 * 4
    assert all(1.5 <= a.distance <= 1.5 * 1.3 for a in hub_arcs)
    assert len(inst.neighbors["h0"]) == 3
    assert inst.p_max == 864_000
    assert validate(inst) == []


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 1000), st.sampled_from([0.05, 0.15, 0.5]))
def test_grid_city_total_demand_exact(rows, cols, seed, pct):
    inst = generate_grid_city(rows, cols, seed=seed, demand_pct=pct, zone_block=2)
    import math
    import numpy as np

    pops = np.random.default_rng(seed).integers(5000, 40001, size=math.ceil(rows / 2) * math.ceil(cols / 2))
    expected = sum(math.floor(pct * int(p) + 0.5) for p in pops)
    assert inst.total_demand == expected


@pytest.mark.parametrize("kw", [dict(rows=0, cols=2), dict(rows=2, cols=2, zones=[]), dict(rows=2, cols=2, demand_pct=0)])
def test_grid_city_errors(kw):
    with pytest.raises(ValueError):
        generate_grid_city(**kw)


def test_shortest_path_examples():
    inst = make_instance("p", ["h"], {"a": 1, "b": 1, "z": 1}, [("h", "a", 1), ("a", "b", 1)], budget=1, p_max=5)
    assert shortest_path_miles(inst, "h", "h") == 0
    assert shortest_path_miles(inst, "h", "b") == 2
    assert shortest_path_miles(inst, "h", "z") is None


def test_shortest_path_lexicographic_tie_break():
    inst = make_instance("p", ["h"], {"a": 1, "b": 1, "t": 1},
                         [("h", "b", 1), ("h", "a", 1), ("b", "t", 1), ("a", "t", 1)], budget=1, p_max=5)
    assert shortest_path(inst, "h", "t") == (2, ["h", "a", "t"])


def test_candidate_arc_key_is_unordered():
    assert CandidateArc("b", "a", 1.0).key == ("a", "b")
