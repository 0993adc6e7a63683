"""Per-node decision rule: behaviors, node state, payoffs and knapsack choice.

A node adopts the subset of its candidate behaviors with the largest summed
payoff whose summed cost fits its resource.  Candidates are behaviors whose
social signal reached the node's threshold and whose cost fits the resource,
plus everything the node already holds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import Graph

__all__ = [
    "Behavior",
    "BehaviorSet",
    "Population",
    "DEFAULT_BEHAVIORS",
    "DEFAULT_W",
    "MAX_KNAPSACK_ITEMS",
    "make_behaviors",
    "init_population",
    "local_signal",
    "signal_matrix",
    "payoff",
    "candidate_behaviors",
    "candidate_matrix",
    "knapsack_select",
    "knapsack_select_many",
]

MAX_KNAPSACK_ITEMS = 20
DEFAULT_W = 0.5

# Payoffs or costs closer than this are treated as equal.
TIE_TOL = 1e-12
# Cost comparisons against a resource allow this much float slack.
BUDGET_TOL = 1e-12
_COST_DECIMALS = 9


@dataclass(frozen=True)
class Behavior:
    id: int
    cost: float
    utility: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.cost <= 1.0:
            raise ValueError(f"behavior {self.id}: cost {self.cost} outside [0, 1]")
        if not 0.0 <= self.utility <= 1.0:
            raise ValueError(f"behavior {self.id}: utility {self.utility} outside [0, 1]")


def make_behaviors(costs: Sequence[float],
                   utilities: Sequence[float] | None = None) -> tuple[Behavior, ...]:
    """Build a roster; utilities default to the costs."""
    if utilities is None:
        utilities = costs
    if len(costs) != len(utilities):
        raise ValueError("costs and utilities differ in length")
    if not costs:
        raise ValueError("need at least one behavior")
    return tuple(Behavior(i, float(c), float(u))
                 for i, (c, u) in enumerate(zip(costs, utilities)))


DEFAULT_BEHAVIORS = make_behaviors((0.2, 0.5, 0.7))


@dataclass(frozen=True)
class BehaviorSet:
    members: frozenset[int]
    total_cost: float
    total_payoff: float


@dataclass
class Population:
    """Mutable per-run node state.

    ``resource`` has shape ``(n,)``; ``threshold``, ``adopted`` and ``pinned``
    have shape ``(n, k)``.  Column ``i`` refers to ``behaviors[i]``.
    """

    behaviors: tuple[Behavior, ...]
    w: float
    resource: np.ndarray
    threshold: np.ndarray
    adopted: np.ndarray
    pinned: np.ndarray
    cost: np.ndarray = field(init=False, repr=False)
    utility: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")
        self.cost = np.array([b.cost for b in self.behaviors], dtype=np.float64)
        self.utility = np.array([b.utility for b in self.behaviors], dtype=np.float64)

    @property
    def n(self) -> int:
        return self.resource.shape[0]

    @property
    def k(self) -> int:
        return len(self.behaviors)

    def copy(self) -> "Population":
        return Population(self.behaviors, self.w, self.resource.copy(),
                          self.threshold.copy(), self.adopted.copy(),
                          self.pinned.copy())

    def adopted_set(self, v: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.adopted[v]).tolist())

    def spent(self) -> np.ndarray:
        """Total cost of each node's adopted behaviors."""
        return self.adopted.astype(np.float64) @ self.cost

    def check_invariants(self) -> None:
        if np.any(self.spent() > self.resource + BUDGET_TOL):
            bad = int(np.flatnonzero(self.spent() > self.resource + BUDGET_TOL)[0])
            raise AssertionError(f"node {bad} exceeds its resource")
        if np.any(self.pinned & ~self.adopted):
            raise AssertionError("pinned behavior missing from adopted set")


def init_population(g: Graph, behaviors: Sequence[Behavior], w: float,
                    rng: np.random.Generator) -> Population:
    """Draw resources and thresholds i.i.d. from U(0, 1); nothing adopted."""
    behaviors = tuple(behaviors)
    if not behaviors:
        raise ValueError("need at least one behavior")
    n, k = g.node_count, len(behaviors)
    resource = rng.random(n)
    threshold = rng.random((n, k))
    return Population(behaviors, float(w), resource, threshold,
                      np.zeros((n, k), dtype=bool), np.zeros((n, k), dtype=bool))


def local_signal(g: Graph, pop: Population, v: int, i: int) -> float:
    """Share of ``v``'s neighbors that hold behavior ``i``."""
    nb = g.neighbors(v)
    if nb.size == 0:
        return 0.0
    return float(np.count_nonzero(pop.adopted[nb, i])) / nb.size


def signal_matrix(g: Graph, adopted: np.ndarray) -> np.ndarray:
    """All local signals at once, shape ``(n, k)``."""
    counts = g.adjacency @ adopted.astype(np.float64)
    return counts * g.inverse_degree[:, None]


def payoff(pop: Population, v: int, i: int, l: float) -> float:
    """Weighted mix of intrinsic utility and social signal for behavior ``i``.

    ``v`` is accepted for symmetry with the other per-node calls; utilities
    do not depend on the node.
    """
    if not 0.0 <= l <= 1.0:
        raise ValueError(f"signal {l} outside [0, 1]")
    return pop.w * pop.utility[i] + (1.0 - pop.w) * l


def _signal_passes(l: np.ndarray, theta: np.ndarray) -> np.ndarray:
    # A zero signal never counts as reaching a threshold.
    return (l > 0.0) & (l >= theta)


def candidate_behaviors(g: Graph, pop: Population, v: int) -> set[int]:
    out = set(np.flatnonzero(pop.adopted[v]).tolist())
    r = pop.resource[v]
    for i in range(pop.k):
        l = local_signal(g, pop, v, i)
        if _signal_passes(np.float64(l), pop.threshold[v, i]) and r >= pop.cost[i]:
            out.add(i)
    return out


def candidate_matrix(pop: Population, signal: np.ndarray) -> np.ndarray:
    """Boolean ``(n, k)`` candidate table given precomputed signals."""
    affordable = pop.resource[:, None] >= pop.cost[None, :]
    return (_signal_passes(signal, pop.threshold) & affordable) | pop.adopted


# --------------------------------------------------------------------------
# Knapsack
# --------------------------------------------------------------------------


def _tie_key(members: Sequence[int], cost: float) -> tuple:
    return (-round(cost, _COST_DECIMALS), tuple(sorted(members)))


def knapsack_select(candidates: Iterable[int], payoffs: Mapping[int, float],
                    costs: Mapping[int, float], budget: float,
                    forced: Iterable[int] = ()) -> BehaviorSet:
    """Exact payoff-maximizing subset of ``candidates`` within ``budget``.

    Enumerates every subset.  Ties on payoff go to the larger total cost,
    then to the lexicographically smallest sorted id tuple.  Items in
    ``forced`` are always part of the answer.
    """
    cands = sorted(set(candidates))
    forced = sorted(set(forced))
    if len(cands) > MAX_KNAPSACK_ITEMS:
        raise ValueError(
            f"{len(cands)} candidates exceed the enumeration cap of "
            f"{MAX_KNAPSACK_ITEMS}; raise MAX_KNAPSACK_ITEMS deliberately")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if not set(forced) <= set(cands):
        raise ValueError("forced items must be candidates")
    free = [c for c in cands if c not in forced]
    base_cost = sum(costs[i] for i in forced)
    base_pay = sum(payoffs[i] for i in forced)
    if base_cost > budget + BUDGET_TOL:
        raise ValueError("forced items exceed the budget")

    best: tuple[float, tuple, tuple[int, ...], float] | None = None
    for r in range(len(free) + 1):
        for combo in itertools.combinations(free, r):
            cost = base_cost + sum(costs[i] for i in combo)
            if cost > budget + BUDGET_TOL:
                continue
            pay = base_pay + sum(payoffs[i] for i in combo)
            members = tuple(sorted(forced + list(combo)))
            key = _tie_key(members, cost)
            if (best is None or pay > best[0] + TIE_TOL
                    or (abs(pay - best[0]) <= TIE_TOL and key < best[1])):
                best = (pay, key, members, cost)
    assert best is not None
    return BehaviorSet(frozenset(best[2]), best[3], best[0])


@lru_cache(maxsize=64)
def _subset_table(costs: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray]:
    """All ``2^k`` subsets as a boolean matrix, in tie-break order."""
    k = len(costs)
    masks = ((np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1).astype(bool)
    subset_cost = masks.astype(np.float64) @ np.asarray(costs)
    keys = [_tie_key(np.flatnonzero(m).tolist(), c) for m, c in zip(masks, subset_cost)]
    order = sorted(range(2 ** k), key=keys.__getitem__)
    masks = masks[order]
    subset_cost = subset_cost[order]
    masks.setflags(write=False)
    subset_cost.setflags(write=False)
    return masks, subset_cost


# Above this many subsets the per-node enumeration is used instead.
_VECTOR_SUBSET_LIMIT = 2 ** 12


def knapsack_select_many(payoffs: np.ndarray, candidates: np.ndarray,
                         forced: np.ndarray, budget: np.ndarray,
                         costs: np.ndarray) -> np.ndarray:
    """Row-wise :func:`knapsack_select` for every node at once.

    Parameters
    ----------
    payoffs : (n, k) float
    candidates, forced : (n, k) bool
        ``forced`` must be a subset of ``candidates`` and fit the budget.
    budget : (n,) float
    costs : (k,) float

    Returns
    -------
    (n, k) bool
        The chosen subset per node.
    """
    n, k = payoffs.shape
    if k > MAX_KNAPSACK_ITEMS:
        raise ValueError(f"k={k} exceeds the enumeration cap {MAX_KNAPSACK_ITEMS}")
    if 2 ** k > _VECTOR_SUBSET_LIMIT:
        return _knapsack_rows(payoffs, candidates, forced, budget, costs)

    masks, subset_cost = _subset_table(tuple(float(c) for c in costs))
    mf = masks.astype(np.float64)
    # subset s feasible for node v iff s within candidates, s covers forced,
    # and its cost fits the budget
    outside = (~candidates).astype(np.float64) @ mf.T
    missed = forced.astype(np.float64) @ (~masks).astype(np.float64).T
    fits = subset_cost[None, :] <= budget[:, None] + BUDGET_TOL
    feasible = (outside == 0) & (missed == 0) & fits
    total = payoffs @ mf.T
    total = np.where(feasible, total, -np.inf)
    best = total.max(axis=1)
    if not np.all(np.isfinite(best)):
        raise ValueError("forced behaviors exceed the budget for some node")
    winners = total >= best[:, None] - TIE_TOL
    choice = np.argmax(winners, axis=1)
    return masks[choice].copy()


def _knapsack_rows(payoffs, candidates, forced, budget, costs) -> np.ndarray:
    n, k = payoffs.shape
    out = np.zeros((n, k), dtype=bool)
    cost_map = dict(enumerate(costs.tolist()))
    for v in range(n):
        cand = np.flatnonzero(candidates[v]).tolist()
        if not cand:
            continue
        pay = dict(zip(range(k), payoffs[v].tolist()))
        sel = knapsack_select(cand, pay, cost_map, float(budget[v]),
                              forced=np.flatnonzero(forced[v]).tolist())
        out[v, list(sel.members)] = True
    return out
