"""
Which behaviors should the seeds carry?
=======================================

Same seed nodes and budget; only the split of the 51 seeds over the three
behaviors changes. Seeding only the cheapest behavior reaches the most
people but uses the least resource.
"""

from rcdiffusion.experiment import ExperimentConfig, run_experiment
from rcdiffusion.seeding import allocate_counts
from rcdiffusion.model import DEFAULT_BEHAVIORS

print(f"{'split':6} {'counts':14} {'particip.':>9} {'adoption':>9} {'util.':>6}")
for dist in ("low", "inv", "unif", "prop", "high"):
    cfg = ExperimentConfig(topology="pa", b=51, alpha=None, distribution=dist,
                           runs=100, master_seed=1)
    res = run_experiment(cfg)
    counts = allocate_counts(51, DEFAULT_BEHAVIORS, dist).per_behavior
    print(f"{dist:6} {str(counts):14} {res.mean['participation']:9.1f} "
          f"{res.mean['adoption']:9.1f} {res.mean['utilization']:6.3f}")

###############################################################################
# Under ``low`` and ``high`` only one behavior ever has adopters, so each
# participant adopts exactly once and the two counts coincide.
