"""Multi-behavior diffusion on resource-constrained social networks.

Nodes hold a fixed resource and adopt the payoff-maximizing set of costly
behaviors they can afford once enough neighbors have adopted them.  The
package provides the diffusion engine, seven seed-selection heuristics,
seed behavior allocations, metrics and a Monte Carlo experiment harness.
"""

from .diffusion import DiffusionOutcome, run, step
from .experiment import (AggregateResult, ExperimentConfig, compare_heuristics,
                         load_config, run_experiment, run_network_average,
                         run_threshold_average, sweep_alpha,
                         target_distribution_experiment)
from .graph import (Graph, generate_preferential_attachment, generate_small_world,
                    generate_spatially_clustered, load_edge_list, read_edge_list,
                    write_edge_list)
from .metrics import (MetricsReport, compute_metrics, kl_divergence,
                      knapsack_utilization_ceiling, max_utilization_estimate)
from .model import (DEFAULT_BEHAVIORS, Behavior, Population, init_population,
                    knapsack_select, make_behaviors)
from .seeding import (HEURISTICS, SeedAssignment, SeedBudget, allocate_counts,
                      apply_seeds, expected_immediate_adoption, h1_random,
                      h2_naive_degree_no_topup, h3_naive_degree_knapsack,
                      h4_naive_degree_topup, h5_degree_resource_ranked, h6_eia_ranked,
                      h7_eia_hill_climbing)

__version__ = "0.1.0"
