"""A four-node network solved three ways.

One depot feeds three microhubs. With two miles of tunnel the best tree
serves a and b; a third mile lets it reach c instead. The full flow MIP,
the branch-and-cut master problem and brute-force enumeration must agree.
"""

from uftnet import make_instance, solve_mip, solve_mp
from uftnet.oracle import enumerate_solutions

inst = make_instance(
    "tiny", ["h"], {"a": 5, "b": 3, "c": 4},
    [("h", "a", 1), ("a", "b", 1), ("a", "c", 2), ("h", "c", 2)],
    budget=2, p_max=100,
)

for budget in (1, 2, 3, 4):
    case = inst.with_budget(budget)
    mip = solve_mip(case).solution
    mp = solve_mp(case)
    oracle = enumerate_solutions(case)
    print(f"budget {budget}: mip={mip.objective} mp={mp.solution.objective} oracle={oracle.objective} "
          f"arcs={mp.solution.arcs}")

# tighten depot capacity so that serving a and c together is no longer allowed
tight = make_instance("tiny-cap", ["h"], {"a": 5, "b": 3, "c": 4},
                      [("h", "a", 1), ("a", "b", 1), ("a", "c", 2), ("h", "c", 2)], budget=3, p_max=8)
out = solve_mp(tight)
print(f"\ncapacity 8, budget 3: serves {out.solution.served} for {out.solution.objective} packages")
print(f"branch and bound explored {out.result.nodes} nodes and added {len(out.cuts)} cuts")
