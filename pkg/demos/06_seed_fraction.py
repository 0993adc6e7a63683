"""
More seeds
==========

Utilization as the seed fraction grows, for four heuristics. The sweep is
written as a CSV ready for plotting.
"""

import sys
import tempfile

from rcdiffusion.experiment import ExperimentConfig, sweep_alpha, write_sweep

cfg = ExperimentConfig(topology="pa", runs=40, master_seed=1)
alphas = (0.02, 0.06, 0.1, 0.14, 0.2)
heuristics = ("H1", "H4", "H5", "H7")
res = sweep_alpha(cfg, alphas, heuristics)

print("alpha " + " ".join(f"{h:>6}" for h in heuristics))
for a in alphas:
    print(f"{a:<5} " + " ".join(f"{res[(a, h)].mean['utilization']:6.3f}" for h in heuristics))

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
print("wrote", write_sweep(res, out) / "sweep.csv")
