"""Cost per package for a city-scale network.

A network serving 373,428 packages a day through 150 miles of tunnel and
114 microhubs, with a farthest trip of 1.27 hours. Changing the number of
loading windows shows how the carriage fleet drives capital cost.
"""

from uftnet import CostParams, cost_breakdown
from uftnet.analytics import format_cost_table

base = cost_breakdown(CostParams(), 373_428, 150, 114, 1.27)
print(format_cost_table(base))

print("\nloading windows vs. cost per package")
for w in (1, 2, 4, 8):
    c = cost_breakdown(CostParams(loading_windows=w), 373_428, 150, 114, 1.27)
    print(f"  w={w}: {c.carriages:>7,} carriages  ${c.total:.3f}/pkg")
