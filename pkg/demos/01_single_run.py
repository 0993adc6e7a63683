"""
One diffusion, start to finish
==============================

Build a 500-node preferential-attachment network, draw resources and
thresholds, pick 51 seeds with the hill-climbing heuristic and let the three
default behaviors spread until nothing changes.
"""

import numpy as np

from rcdiffusion import (DEFAULT_BEHAVIORS, allocate_counts, apply_seeds, compute_metrics,
                         generate_preferential_attachment, h7_eia_hill_climbing,
                         init_population, run)

rng = np.random.default_rng(7)
g = generate_preferential_attachment(500, rng)
print(f"{g.node_count} nodes, {g.edge_count} edges, largest hub has degree {g.degree.max()}")

###############################################################################
# Every node gets a resource and one threshold per behavior, all U(0, 1).
# Behaviors cost 0.2, 0.5 and 0.7, and their intrinsic utility equals the cost.

pop = init_population(g, DEFAULT_BEHAVIORS, w=0.5, rng=rng)
print("mean resource", pop.resource.mean().round(3))

###############################################################################
# Seeds. The budget is split evenly, 17 per behavior. Seeds that cannot
# afford their behavior get their resource topped up to its cost.

budget = allocate_counts(51, pop.behaviors, "unif")
assignment = h7_eia_hill_climbing(g, pop, budget, rng)
seeded = apply_seeds(pop, assignment)
print("seeds per behavior", assignment.counts(), "| topped up:", len(assignment.topped_up))

###############################################################################
# Diffuse. With ``trace=True`` the outcome records new adoptions per epoch.

outcome = run(g, seeded, trace=True)
for epoch, row in enumerate(outcome.adoption_events, start=1):
    print(f"epoch {epoch:2d}: new adoptions {row.tolist()}")

report = compute_metrics(seeded, outcome)
print(f"participation {report.participation}, adoption {report.adoption}, "
      f"utilization {report.utilization:.3f}")
