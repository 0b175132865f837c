"""How much of a city can a tunnel budget reach?

Sweeps the bundled 5x5 grid city from a tenth of its candidate tunnel
length up to all of it, and reports share served, truck trips avoided and
the cost per package of each design.
"""

import numpy as np

from uftnet import bundled_instance
from uftnet.analytics import percent_served, savings, solution_cost
from uftnet.master import solve_mp

city = bundled_instance()
total = sum(a.distance for a in city.arcs)
print(f"{city.name}: {len(city.microhubs)} microhubs, {sum(city.demand.values()):,} packages/day, "
      f"{total:.1f} miles of candidate tunnel\n")
print(f"{'miles':>7} {'served':>8} {'trucks':>7} {'truck mi':>9} {'$/pkg':>8}")

for budget in np.linspace(total / 10, total, 10):
    inst = city.with_budget(float(budget))
    sol = solve_mp(inst).solution
    rep = savings(inst, sol)
    cost = solution_cost(inst, sol).total
    print(f"{budget:7.1f} {percent_served(inst, sol):7.1f}% {rep.trucks:7d} {rep.truck_miles:9.1f} {cost:8.2f}")
