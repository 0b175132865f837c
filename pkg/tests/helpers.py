"""Shared builders for the test suite."""

import random

from uftnet.instance import make_instance


def t1(budget=2, p_max=100):
    """One depot h; hubs a(5), b(3), c(4); arcs h-a 1, a-b 1, a-c 2, h-c 2."""
    return make_instance(
        "T1", ["h"], {"a": 5, "b": 3, "c": 4},
        [("h", "a", 1), ("a", "b", 1), ("a", "c", 2), ("h", "c", 2)],
        n_d=1, budget=budget, p_max=p_max,
    )


def random_instance(seed, max_hubs=10, max_arcs=9):
    """Small random instance: n_d in {1, 2}, at most two depots, integer demands 1-100."""
    rng = random.Random(seed)
    n_d = rng.choice([1, 2])
    n_depots = 2 if n_d == 2 else rng.randint(1, 2)
    n_hubs = rng.randint(3, max_hubs)
    depots = [f"h{i}" for i in range(n_depots)]
    hubs = [f"m{i}" for i in range(n_hubs)]
    demand = {m: rng.randint(1, 100) for m in hubs}
    chosen = [(h, rng.choice(hubs)) for h in depots]
    pairs = [(h, m) for h in depots for m in hubs] + [(a, b) for a in hubs for b in hubs if a < b]
    rng.shuffle(pairs)
    n_arcs = rng.randint(max(len(chosen), 4), max_arcs)
    for p in pairs:
        if len(chosen) >= n_arcs:
            break
        if p not in chosen:
            chosen.append(p)
    arcs = [(a, b, rng.randint(1, 10)) for a, b in chosen]
    budget = rng.randint(1, sum(d for *_, d in arcs))
    p_max = rng.randint(50, sum(demand.values()) + 50)
    return make_instance(f"rand{seed}", depots, demand, arcs, n_d=n_d, budget=budget, p_max=p_max)
