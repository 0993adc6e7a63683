"""
What a lone node would spend
============================

Before any social influence, each node picks the subset of behaviors with
the best payoff that it can afford. With utilities equal to costs, that is
the largest affordable spend, so utilization cannot beat the average best
spend divided by the average resource.
"""

import numpy as np

from rcdiffusion import DEFAULT_BEHAVIORS, knapsack_select, knapsack_utilization_ceiling

costs = {b.id: b.cost for b in DEFAULT_BEHAVIORS}
for budget in (0.1, 0.3, 0.6, 0.7, 0.8, 0.95):
    best = knapsack_select(costs, costs, costs, budget)
    print(f"r={budget:<4}  picks {sorted(best.members)}  spends {best.total_cost:.1f}")

###############################################################################
# At r=0.7 the sets {0.2, 0.5} and {0.7} pay the same and cost the same, so
# the smaller ids win.
#
# Over r ~ U(0, 1) the spend is 0, 0.2, 0.5, 0.7 or 0.9 on the intervals
# cut at those same values, for an expected spend of 0.39 against an
# expected resource of 0.5.

exact = (0.2 * 0.3 + 0.5 * 0.2 + 0.7 * 0.2 + 0.9 * 0.1) / 0.5
mc = knapsack_utilization_ceiling(DEFAULT_BEHAVIORS, 0.5, 10**6, np.random.default_rng(0))
print(f"ceiling: exact {exact:.4f}, Monte Carlo {mc:.4f}")
