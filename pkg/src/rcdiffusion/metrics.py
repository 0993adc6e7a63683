"""Participation, adoption, resource utilization and distribution distances."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .diffusion import DEFAULT_MAX_EPOCHS, DiffusionOutcome, run
from .graph import Graph
from .model import (Behavior, Population, init_population, knapsack_select_many)

__all__ = [
    "MetricsReport",
    "compute_metrics",
    "kl_divergence",
    "knapsack_choice",
    "knapsack_utilization_ceiling",
    "max_utilization_estimate",
]

KL_EPS = 1e-9


@dataclass(frozen=True)
class MetricsReport:
    participation: int
    adoption: int
    utilization: float
    per_behavior_counts: tuple[int, ...]
    behavior_distribution: tuple[float, ...]

    def as_dict(self) -> dict:
        return asdict(self)


def compute_metrics(pop: Population, outcome: DiffusionOutcome) -> MetricsReport:
    """Metrics of a finished run.

    Utilization divides the total cost of adopted behaviors by the total
    resource of the population, both measured after seed top-ups.  The
    behavior distribution normalizes per-behavior counts by total adoption.
    """
    adopted = outcome.final_adopted
    if adopted.shape != pop.threshold.shape:
        raise ValueError("outcome does not belong to this population")
    counts = adopted.sum(axis=0)
    adoption = int(counts.sum())
    participation = int(np.count_nonzero(adopted.any(axis=1)))
    total_r = float(pop.resource.sum())
    used = float(counts @ pop.cost)
    utilization = used / total_r if total_r > 0 else 0.0
    if adoption > 0:
        dist = tuple(float(c) / adoption for c in counts)
    else:
        dist = tuple(0.0 for _ in counts)
    return MetricsReport(participation, adoption, utilization,
                         tuple(int(c) for c in counts), dist)


def kl_divergence(target: Sequence[float], achieved: Sequence[float]) -> float:
    """``D(target || achieved)`` in nats.

    ``achieved`` is smoothed by adding ``1e-9`` per entry and renormalized,
    so a behavior that died out gives a large but finite value.  Zero
    entries of ``target`` contribute nothing.
    """
    q = np.asarray(target, dtype=np.float64)
    p = np.asarray(achieved, dtype=np.float64)
    if q.shape != p.shape:
        raise ValueError(f"length mismatch: {q.size} vs {p.size}")
    for name, vec in (("target", q), ("achieved", p)):
        if np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-9:
            raise ValueError(f"{name} is not a probability vector")
    p = (p + KL_EPS) / (p + KL_EPS).sum()
    nz = q > 0
    return float(np.sum(q[nz] * np.log(q[nz] / p[nz])))


def knapsack_choice(pop: Population) -> np.ndarray:
    """Each node's best behavior set on intrinsic payoff alone, ``(n, k)``."""
    n, k = pop.threshold.shape
    pay = np.broadcast_to(pop.w * pop.utility, (n, k))
    everything = np.ones((n, k), dtype=bool)
    return knapsack_select_many(pay, everything, np.zeros((n, k), dtype=bool),
                                pop.resource, pop.cost)


def knapsack_utilization_ceiling(behaviors: Sequence[Behavior], w: float,
                                 draws: int, rng: np.random.Generator) -> float:
    """Utilization if every node adopts its own optimum and nothing diffuses.

    Resources are ``draws`` samples of U(0, 1).
    """
    behaviors = tuple(behaviors)
    k = len(behaviors)
    pop = Population(behaviors, w, rng.random(draws), np.zeros((draws, k)),
                     np.zeros((draws, k), dtype=bool), np.zeros((draws, k), dtype=bool))
    chosen = knapsack_choice(pop)
    return float((chosen @ pop.cost).sum() / pop.resource.sum())


def full_seed_utilization(g: Graph, pop: Population, max_epochs: int = DEFAULT_MAX_EPOCHS,
                          drop_allowed: bool = True) -> tuple[float, DiffusionOutcome]:
    """One run of the everyone-adopts-first procedure on a fresh population.

    Every node starts holding its own knapsack optimum (not pinned), then
    the diffusion runs to its fixed point.
    """
    pop = pop.copy()
    pop.adopted = knapsack_choice(pop)
    outcome = run(g, pop, max_epochs=max_epochs, drop_allowed=drop_allowed)
    return compute_metrics(pop, outcome).utilization, outcome


def max_utilization_estimate(g: Graph, behaviors: Sequence[Behavior], w: float,
                             runs: int, rng: np.random.Generator,
                             max_epochs: int = DEFAULT_MAX_EPOCHS,
                             drop_allowed: bool = True) -> tuple[float, float]:
    """Monte Carlo mean and standard error of :func:`full_seed_utilization`.

    Each run draws a fresh population on the fixed graph ``g``.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    vals = np.empty(runs)
    for r in range(runs):
        pop = init_population(g, behaviors, w, rng)
        vals[r], _ = full_seed_utilization(g, pop, max_epochs, drop_allowed)
    stderr = float(vals.std(ddof=1) / np.sqrt(runs)) if runs > 1 else 0.0
    return float(vals.mean()), stderr
