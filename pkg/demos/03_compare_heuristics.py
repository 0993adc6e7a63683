"""
Seven ways to choose seeds
==========================

Every heuristic sees the same topology and the same node draws run by run,
so differences come from the seeds alone.
"""

from rcdiffusion.experiment import ExperimentConfig, compare_heuristics

cfg = ExperimentConfig(topology="pa", b=51, alpha=None, runs=100, master_seed=1)
comp = compare_heuristics(cfg, ["H1", "H2", "H3", "H4", "H5", "H6", "H7"])

for name, res in comp.results.items():
    m, se = res.mean["utilization"], res.stderr["utilization"]
    print(f"{name}: utilization {m:.3f} +- {se:.3f}")

###############################################################################
# Welch tests for the pairs involving the hill-climbing heuristic.

for row in comp.rows:
    if "H7" in (row["a"], row["b"]):
        print(f"{row['a']} vs {row['b']}: diff {row['difference']:+.3f}, p={row['p']:.2g}")
