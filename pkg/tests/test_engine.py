import itertools
import random

import numpy as np
import pytest

from uftnet.engine import (
    GAP_TOL,
    INT_TOL,
    Constraint,
    Limits,
    MilpModel,
    lp_solve,
    milp_solve,
)


def knapsack():
    m = MilpModel("knap")
    a = m.add_var("a", 0, 1, binary=True, obj=5)
    b = m.add_var("b", 0, 1, binary=True, obj=3)
    m.add_constraint({a: 1, b: 1}, "<=", 1)
    return m, a, b


def test_lp_single_bounded_variable():
    m = MilpModel()
    m.add_var("x", 0, 1, obj=1)
    sol = lp_solve(m)
    assert sol.status == "optimal" and sol.objective == pytest.approx(1) and sol.x[0] == pytest.approx(1)


def test_lp_one_row():
    m = MilpModel()
    x, y = m.add_var("x", 0, 1, obj=1), m.add_var("y", 0, 1, obj=1)
    m.add_constraint({x: 1, y: 1}, "<=", 1)
    assert lp_solve(m).objective == pytest.approx(1)


def test_lp_infeasible():
    m = MilpModel()
    x = m.add_var("x", 0, 1, obj=1)
    m.add_constraint({x: 1}, ">=", 2)
    assert lp_solve(m).status == "infeasible"


def test_lp_equalities_and_negative_bounds():
    m = MilpModel()
    x = m.add_var("x", -3, 3, obj=1)
    y = m.add_var("y", -3, 3, obj=2)
    m.add_constraint({x: 1, y: 1}, "==", 1)
    m.add_constraint({x: 1, y: -1}, ">=", -4)
    sol = lp_solve(m)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.5)
    assert m.violations(sol.x) == []


def random_lp(rng, n, m):
    model = MilpModel()
    for j in range(n):
        lo = rng.choice([0.0, -1.0, 0.0])
        model.add_var(f"v{j}", lo, lo + rng.choice([1.0, 2.0, 5.0]), obj=rng.randint(-5, 9))
    for _ in range(m):
        row = {j: rng.randint(-3, 5) for j in rng.sample(range(n), rng.randint(1, n))}
        model.add_constraint(row, rng.choice(["<=", ">=", "=="]), rng.randint(-3, 8))
    return model


def test_simplex_agrees_with_highs_on_random_lps():
    rng = random.Random(5)
    for _ in range(150):
        model = random_lp(rng, rng.randint(1, 7), rng.randint(0, 6))
        ours, ref = lp_solve(model), lp_solve(model, backend="highs")
        assert ours.status == ref.status
        if ours.status == "optimal":
            assert ours.objective == pytest.approx(ref.objective, abs=1e-6)
            assert model.violations(ours.x, 1e-7) == []


def test_lp_bounds_override():
    m = MilpModel()
    m.add_var("x", 0, 1, obj=1)
    assert lp_solve(m, lb=[0], ub=[0.25]).objective == pytest.approx(0.25)


def test_milp_knapsack():
    m, a, b = knapsack()
    res = milp_solve(m)
    assert res.status == "optimal" and res.objective == 5 and res.x[a] == 1


def test_milp_callback_forces_alternative():
    m, a, b = knapsack()

    def cb(values):
        if values[a] > 0.5:
            return [Constraint({a: 1.0}, "<=", 0.0, "no-a")]
        return []

    res = milp_solve(m, cb)
    assert res.objective == 3 and res.x[b] == 1 and res.cuts_added == 1
    assert m.constraints[-1].name == "no-a"


def test_milp_fractional_root_branches():
    m = MilpModel()
    a = m.add_var("a", 0, 1, binary=True, obj=1)
    b = m.add_var("b", 0, 1, binary=True, obj=1)
    m.add_constraint({a: 2, b: 2}, "<=", 3)
    assert lp_solve(m).objective == pytest.approx(1.5)
    res = milp_solve(m)
    assert res.status == "optimal" and res.objective == 1 and res.nodes > 1


def test_milp_infeasible():
    m = MilpModel()
    a = m.add_var("a", 0, 1, binary=True, obj=1)
    b = m.add_var("b", 0, 1, binary=True, obj=1)
    m.add_constraint({a: 1, b: 1}, "==", 1)
    m.add_constraint({a: 2, b: 2}, ">=", 3)
    assert milp_solve(m).status == "infeasible"


def test_callback_row_must_cut_off_candidate():
    m, a, b = knapsack()
    with pytest.raises(RuntimeError, match="does not cut off"):
        milp_solve(m, lambda v: [Constraint({b: 1.0}, "<=", 1.0, "useless")])


def random_milp(rng, n_bin, n_cont, n_rows):
    model = MilpModel()
    for j in range(n_bin):
        model.add_var(f"b{j}", 0, 1, binary=True, obj=rng.randint(-3, 10))
    for j in range(n_cont):
        model.add_var(f"c{j}", 0, rng.choice([1.0, 2.5]), obj=rng.randint(-2, 4))
    n = n_bin + n_cont
    for _ in range(n_rows):
        row = {j: rng.randint(-2, 6) for j in rng.sample(range(n), rng.randint(1, n))}
        model.add_constraint(row, rng.choice(["<=", "<=", ">="]), rng.randint(0, 9))
    return model


def enumerate_binaries(model):
    """Best objective over all binary assignments, continuous part by LP."""
    bins = [j for j, b in enumerate(model.binary) if b]
    best = None
    for bits in itertools.product([0.0, 1.0], repeat=len(bins)):
        lb, ub = list(model.lb), list(model.ub)
        for j, v in zip(bins, bits):
            lb[j] = ub[j] = v
        sol = lp_solve(model, lb, ub, backend="highs")
        if sol.status == "optimal" and (best is None or sol.objective > best):
            best = sol.objective
    return best


def test_milp_matches_enumeration():
    rng = random.Random(17)
    for trial in range(40):
        model = random_milp(rng, rng.randint(1, 8), rng.randint(0, 2), rng.randint(1, 5))
        expected = enumerate_binaries(model)
        res = milp_solve(model)
        if expected is None:
            assert res.status == "infeasible", trial
        else:
            assert res.status == "optimal", trial
            assert res.objective == pytest.approx(expected, abs=1e-6), trial
            assert model.is_integral(res.x, INT_TOL)
            assert model.violations(res.x, 1e-6) == []
            assert abs(res.objective - res.bound) <= max(GAP_TOL, GAP_TOL * abs(res.objective))


def test_milp_matches_enumeration_fifteen_binaries():
    rng = random.Random(99)
    model = MilpModel()
    w = [rng.randint(1, 20) for _ in range(15)]
    for j in range(15):
        model.add_var(f"b{j}", 0, 1, binary=True, obj=rng.randint(1, 20))
    model.add_constraint(dict(enumerate(w)), "<=", sum(w) // 3)
    model.add_constraint({0: 1, 1: 1, 2: 1}, "<=", 1)
    best = max(
        sum(model.obj[j] for j in range(15) if mask >> j & 1)
        for mask in range(1 << 15)
        if sum(w[j] for j in range(15) if mask >> j & 1) <= sum(w) // 3 and (mask & 1) + (mask >> 1 & 1) + (mask >> 2 & 1) <= 1
    )
    assert milp_solve(model).objective == best


def test_bound_history_nonincreasing_and_deterministic():
    rng = random.Random(3)
    for _ in range(10):
        shape = (rng.randint(4, 10), rng.randint(0, 2), rng.randint(2, 5), rng.random())
        models = [random_milp(random.Random(shape[3]), *shape[:3]) for _ in range(2)]
        r1, r2 = milp_solve(models[0]), milp_solve(models[1])
        hist = r1.bound_history
        assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
        assert (r1.status, r1.nodes, r1.objective) == (r2.status, r2.nodes, r2.objective)
        if r1.x is not None:
            assert np.array_equal(r1.x, r2.x)


def test_node_limit_reports_honestly():
    rng = random.Random(8)
    model = MilpModel()
    w = [rng.randint(5, 30) for _ in range(14)]
    for j in range(14):
        model.add_var(f"b{j}", 0, 1, binary=True, obj=w[j] + rng.randint(0, 3))
    model.add_constraint(dict(enumerate(w)), "<=", sum(w) / 2 + 0.5)
    res = milp_solve(model, limits=Limits(node_limit=1))
    assert res.status == "limit"
    full = milp_solve(model)
    assert res.bound >= full.objective - 1e-9
    if res.objective is not None:
        assert res.objective <= full.objective


def test_model_invariants():
    m = MilpModel()
    with pytest.raises(ValueError):
        m.add_var("x", 0, float("inf"))
    with pytest.raises(ValueError):
        m.add_var("b", 0, 2, binary=True)
    m.add_var("x", 0, 1)
    with pytest.raises(ValueError):
        m.add_var("x", 0, 1)
    with pytest.raises(ValueError):
        m.add_constraint({5: 1}, "<=", 1)
    with pytest.raises(ValueError):
        m.add_constraint({0: 1}, "<", 1)


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling LP, maximised as the negated minimisation
    m = MilpModel()
    x4, x5, x6, x7 = (m.add_var(n, 0, 100, obj=c) for n, c in
                      [("x4", 0.75), ("x5", -20), ("x6", 0.5), ("x7", -6)])
    m.add_constraint({x4: 0.25, x5: -8, x6: -1, x7: 9}, "<=", 0)
    m.add_constraint({x4: 0.5, x5: -12, x6: -0.5, x7: 3}, "<=", 0)
    m.add_constraint({x6: 1}, "<=", 1)
    sol = lp_solve(m)
    assert sol.status == "optimal" and sol.objective == pytest.approx(1.25)
