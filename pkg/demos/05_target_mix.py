"""
Hitting a target mix
====================

To end up with adoptions in a 3:2:1 ratio, seed in that ratio and measure
how far the equilibrium drifts from it with the KL divergence.
"""

from rcdiffusion.experiment import ExperimentConfig, target_distribution_experiment

base = ExperimentConfig(topology="sw", b=51, alpha=None, runs=100, master_seed=1)
for q in ((1, 1, 1), (3, 2, 1), (1, 2, 3)):
    res = target_distribution_experiment(base, q)
    achieved = ", ".join(f"{x:.2f}" for x in res.distribution_mean)
    print(f"target {':'.join(map(str, q))} -> achieved ({achieved}), "
          f"mean KL {res.mean['kl']:.3f}")
