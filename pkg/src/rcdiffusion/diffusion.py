"""Synchronous epoch engine for multi-behavior adoption.

Every node decides from the same epoch-start snapshot: it computes its
candidates, solves its knapsack over them and installs the result.  In the
default monotone mode a node keeps everything it already holds and can only
add; with ``drop_allowed`` only seeded (pinned) behaviors are kept for sure
and the rest may be swapped out for a better subset.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .model import (BUDGET_TOL, Population, candidate_matrix,
                    knapsack_select_many, signal_matrix)

__all__ = ["DiffusionOutcome", "InvariantError", "step", "run", "write_trace"]

DEFAULT_MAX_EPOCHS = 1000


class InvariantError(RuntimeError):
    """A node state broke the resource or pinning invariant."""


@dataclass
class DiffusionOutcome:
    final_adopted: np.ndarray
    epochs_run: int
    converged: bool
    adoption_events: np.ndarray | None = None
    """``(epochs_run, k)`` counts of new adoptions per epoch, if traced."""


def step(g: Graph, pop: Population, drop_allowed: bool = False) -> bool:
    """Advance one epoch in place; return whether any adopted set changed."""
    adopted = pop.adopted
    pinned_cost = pop.pinned.astype(np.float64) @ pop.cost
    if np.any(pinned_cost > pop.resource + BUDGET_TOL):
        v = int(np.flatnonzero(pinned_cost > pop.resource + BUDGET_TOL)[0])
        raise InvariantError(f"pinned behaviors of node {v} exceed its resource")

    signal = signal_matrix(g, adopted)
    cand = candidate_matrix(pop, signal)
    forced = pop.pinned if drop_allowed else adopted
    pay = pop.w * pop.utility[None, :] + (1.0 - pop.w) * signal
    new = knapsack_select_many(pay, cand, forced | pop.pinned,
                               pop.resource, pop.cost)
    changed = not np.array_equal(new, adopted)
    pop.adopted = new
    return changed


def run(g: Graph, pop: Population, max_epochs: int = DEFAULT_MAX_EPOCHS,
        drop_allowed: bool = False, trace: bool = False) -> DiffusionOutcome:
    """Step until nothing changes or ``max_epochs`` epochs have run.

    ``epochs_run`` counts every call to :func:`step`, including the final
    quiet one that confirms the fixed point.
    """
    if max_epochs < 1:
        raise ValueError("max_epochs must be >= 1")
    events: list[np.ndarray] = []
    converged = False
    epochs = 0
    while epochs < max_epochs:
        before = pop.adopted
        changed = step(g, pop, drop_allowed=drop_allowed)
        epochs += 1
        if trace:
            events.append((pop.adopted & ~before).sum(axis=0))
        if not changed:
            converged = True
            break
    return DiffusionOutcome(
        final_adopted=pop.adopted.copy(),
        epochs_run=epochs,
        converged=converged,
        adoption_events=np.array(events, dtype=np.int64).reshape(-1, pop.k) if trace else None,
    )


def write_trace(outcome: DiffusionOutcome, path: str | os.PathLike) -> None:
    """CSV with columns ``epoch, behavior_id, new_adoptions``."""
    if outcome.adoption_events is None:
        raise ValueError("outcome was not traced; rerun with trace=True")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "behavior_id", "new_adoptions"])
        for epoch, row in enumerate(outcome.adoption_events, start=1):
            for i, count in enumerate(row):
                w.writerow([epoch, i, int(count)])
