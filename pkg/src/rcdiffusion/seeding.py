"""Seed budgets, the seven seed-selection heuristics, and seed application.

Heuristics never modify the population they are given.  Any resource top-ups
they decide on are returned in :attr:`SeedAssignment.topped_up` and take
effect in :func:`apply_seeds`.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import Graph
from .model import Behavior, Population, knapsack_select

__all__ = [
    "SeedBudget",
    "SeedAssignment",
    "DISTRIBUTIONS",
    "HEURISTICS",
    "allocate_counts",
    "expected_immediate_adoption",
    "h1_random",
    "h2_naive_degree_no_topup",
    "h3_naive_degree_knapsack",
    "h4_naive_degree_topup",
    "h5_degree_resource_ranked",
    "h6_eia_ranked",
    "h7_eia_hill_climbing",
    "apply_seeds",
    "core_hill_climbing",
    "read_assignment",
    "sufficient_neighbor_counts",
    "write_assignment",
]

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("low", "inv", "unif", "prop", "high", "target")


@dataclass(frozen=True)
class SeedBudget:
    total: int
    per_behavior: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b < 0 for b in self.per_behavior):
            raise ValueError("per-behavior seed counts must be non-negative")
        if sum(self.per_behavior) != self.total:
            raise ValueError("per-behavior counts do not sum to the total")


@dataclass
class SeedAssignment:
    """Seed sets per behavior plus the resource top-ups they require.

    ``multi_behavior`` marks assignments where one node may seed several
    behaviors (the knapsack heuristic); every other heuristic produces
    pairwise disjoint sets.
    """

    per_behavior_sets: list[set[int]]
    topped_up: dict[int, float] = field(default_factory=dict)
    partial: bool = False
    multi_behavior: bool = False

    @property
    def seed_nodes(self) -> set[int]:
        return set().union(*self.per_behavior_sets)

    def counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.per_behavior_sets)


def _largest_remainder(total: int, weights: np.ndarray) -> tuple[int, ...]:
    shares = total * weights / weights.sum()
    base = np.floor(shares).astype(int)
    short = total - int(base.sum())
    # rounding keeps float noise from breaking exact ties; the stable sort
    # then gives equal remainders to the lower index
    frac = np.round(shares - base, 9)
    for i in np.argsort(-frac, kind="stable")[:short]:
        base[i] += 1
    return tuple(int(x) for x in base)


def allocate_counts(total: int, behaviors: Sequence[Behavior], strategy: str,
                    target: Sequence[float] | None = None) -> SeedBudget:
    """Split ``total`` seeds over behaviors.

    ``strategy`` is one of ``low``, ``high`` (everything to the cheapest or
    dearest behavior), ``unif``, ``prop`` (by cost), ``inv`` (by inverse
    cost) or ``target`` (by the probability vector ``target``).
    """
    if total < 1:
        raise ValueError("total seed count must be >= 1")
    k = len(behaviors)
    costs = np.array([b.cost for b in behaviors], dtype=np.float64)
    strategy = strategy.lower()
    if strategy == "low":
        counts = [0] * k
        counts[int(np.argmin(costs))] = total
        return SeedBudget(total, tuple(counts))
    if strategy == "high":
        counts = [0] * k
        counts[int(np.argmax(costs))] = total
        return SeedBudget(total, tuple(counts))
    if strategy == "unif":
        weights = np.ones(k)
    elif strategy == "prop":
        weights = costs
    elif strategy == "inv":
        if np.any(costs <= 0):
            raise ValueError("inverse-cost split needs strictly positive costs")
        weights = 1.0 / costs
    elif strategy == "target":
        if target is None:
            raise ValueError("target strategy needs a target vector")
        weights = np.asarray(target, dtype=np.float64)
        if weights.shape != (k,):
            raise ValueError(f"target has length {weights.size}, expected {k}")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("target entries must be non-negative with positive sum")
    else:
        raise ValueError(f"unknown distribution {strategy!r}")
    if weights.sum() <= 0:
        raise ValueError("allocation weights sum to zero")
    return SeedBudget(total, _largest_remainder(total, weights))


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _check_budget(g: Graph, pop: Population, budget: SeedBudget) -> None:
    if len(budget.per_behavior) != pop.k:
        raise ValueError("budget length does not match the behavior count")
    if budget.total > g.node_count:
        raise ValueError(f"budget of {budget.total} seeds exceeds {g.node_count} nodes")


def _rank(scores: np.ndarray, nodes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """``nodes`` sorted by decreasing score, ties in random order."""
    jitter = rng.random(nodes.size)
    return nodes[np.lexsort((jitter, -scores[nodes]))]


def _top_up(resource: np.ndarray, v: int, c: float, topped: dict[int, float]) -> None:
    if resource[v] < c:
        resource[v] = c
        topped[v] = c


def _warn_partial(name: str, budget_left: Sequence[int]) -> None:
    log.warning("%s ran out of nodes with %s seeds still unassigned", name, list(budget_left))


def _degree_walk(g: Graph, pop: Population, budget: SeedBudget,
                 rng: np.random.Generator, top_up: bool) -> SeedAssignment:
    # Shared body of the two random-behavior naive degree heuristics.
    _check_budget(g, pop, budget)
    b = list(budget.per_behavior)
    sets: list[set[int]] = [set() for _ in range(pop.k)]
    topped: dict[int, float] = {}
    resource = pop.resource.copy()
    order = _rank(g.degree.astype(np.float64), np.arange(g.node_count), rng)
    for v in order:
        if sum(b) == 0:
            break
        open_ = [i for i in range(pop.k) if b[i] > 0]
        j = open_[int(rng.integers(len(open_)))]
        if top_up:
            _top_up(resource, int(v), pop.cost[j], topped)
        elif resource[v] < pop.cost[j]:
            continue
        sets[j].add(int(v))
        b[j] -= 1
    partial = sum(b) > 0
    if partial:
        _warn_partial("naive degree", b)
    return SeedAssignment(sets, topped, partial)


def _round_robin(g: Graph, pop: Population, budget: SeedBudget,
                 rng: np.random.Generator,
                 pick: Callable[[int, int, list[set[int]], np.ndarray, np.ndarray], list[int]],
                 name: str) -> SeedAssignment:
    """Selection rounds shared by the ranked and hill-climbing heuristics.

    Each round asks ``pick(i, b[i], S, remaining, resource)`` for up to
    ``b[i]`` nodes per behavior.  A node picked for several behaviors takes
    one of them uniformly at random and is topped up if needed.
    """
    _check_budget(g, pop, budget)
    k = pop.k
    b = list(budget.per_behavior)
    sets: list[set[int]] = [set() for _ in range(k)]
    topped: dict[int, float] = {}
    resource = pop.resource.copy()
    remaining = np.ones(g.node_count, dtype=bool)
    while sum(b) > 0 and remaining.any():
        picks: dict[int, list[int]] = {}
        for i in range(k):
            if b[i] == 0:
                continue
            for v in pick(i, b[i], sets, remaining, resource):
                picks.setdefault(v, []).append(i)
        if not picks:
            break
        remaining[list(picks)] = False
        for v in sorted(picks):
            options = picks[v]
            j = options[int(rng.integers(len(options)))]
            _top_up(resource, v, pop.cost[j], topped)
            sets[j].add(v)
            b[j] -= 1
    partial = sum(b) > 0
    if partial:
        _warn_partial(name, b)
    return SeedAssignment(sets, topped, partial)


# --------------------------------------------------------------------------
# heuristics
# --------------------------------------------------------------------------


def h1_random(g: Graph, pop: Population, budget: SeedBudget,
              rng: np.random.Generator) -> SeedAssignment:
    """Uniform random seeds; behaviors dealt out per the budget, with top-up."""
    _check_budget(g, pop, budget)
    chosen = rng.choice(g.node_count, size=budget.total, replace=False)
    sets: list[set[int]] = [set() for _ in range(pop.k)]
    topped: dict[int, float] = {}
    resource = pop.resource.copy()
    start = 0
    for j, count in enumerate(budget.per_behavior):
        for v in chosen[start:start + count]:
            _top_up(resource, int(v), pop.cost[j], topped)
            sets[j].add(int(v))
        start += count
    return SeedAssignment(sets, topped)


def h2_naive_degree_no_topup(g: Graph, pop: Population, budget: SeedBudget,
                             rng: np.random.Generator) -> SeedAssignment:
    """Walk nodes by degree; a node drawn for a behavior it cannot afford is
    used up without being seeded."""
    return _degree_walk(g, pop, budget, rng, top_up=False)


def h3_naive_degree_knapsack(g: Graph, pop: Population, budget: SeedBudget,
                             rng: np.random.Generator) -> SeedAssignment:
    """Walk nodes by degree; each seeds its own knapsack-optimal behavior set.

    A node chooses among the behaviors that still need seeds, scoring them by
    intrinsic utility alone (no neighbor is active yet), and every behavior
    in its set is credited.  Nodes that can afford none of them are skipped.
    """
    _check_budget(g, pop, budget)
    k = pop.k
    b = list(budget.per_behavior)
    sets: list[set[int]] = [set() for _ in range(k)]
    payoffs = dict(enumerate((pop.w * pop.utility).tolist()))
    costs = dict(enumerate(pop.cost.tolist()))
    order = _rank(g.degree.astype(np.float64), np.arange(g.node_count), rng)
    for v in order:
        if sum(b) == 0:
            break
        open_ = [i for i in range(k) if b[i] > 0]
        chosen = knapsack_select(open_, payoffs, costs, float(pop.resource[v]))
        for i in chosen.members:
            sets[i].add(int(v))
            b[i] -= 1
    partial = sum(b) > 0
    if partial:
        _warn_partial("naive degree knapsack", b)
    return SeedAssignment(sets, {}, partial, multi_behavior=True)


def h4_naive_degree_topup(g: Graph, pop: Population, budget: SeedBudget,
                          rng: np.random.Generator) -> SeedAssignment:
    """Like :func:`h2_naive_degree_no_topup` but every drawn node is seeded,
    its resource raised to the behavior's cost when short."""
    return _degree_walk(g, pop, budget, rng, top_up=True)


def sufficient_neighbor_counts(g: Graph, pop: Population) -> np.ndarray:
    """``(n, k)`` count of each node's neighbors able to afford each behavior."""
    able = (pop.resource[:, None] >= pop.cost[None, :]).astype(np.float64)
    return np.asarray(g.adjacency @ able)


def h5_degree_resource_ranked(g: Graph, pop: Population, budget: SeedBudget,
                              rng: np.random.Generator) -> SeedAssignment:
    d = sufficient_neighbor_counts(g, pop)

    def pick(i, count, sets, remaining, resource):
        nodes = np.flatnonzero(remaining)
        return _rank(d[:, i], nodes, rng)[:count].tolist()

    return _round_robin(g, pop, budget, rng, pick, "degree-resource ranked")


def expected_immediate_adoption(g: Graph, pop: Population, i: int,
                                excluded: set[int] | np.ndarray | None = None,
                                resource: np.ndarray | None = None) -> np.ndarray:
    """One-step expected adoptions of behavior ``i`` if each node alone seeds it.

    ``e(v) = 1 + sum(1/|N(u)|)`` over neighbors ``u`` that can afford the
    behavior and are not ``excluded``.  Excluded nodes get ``nan``.
    """
    n = g.node_count
    r = pop.resource if resource is None else resource
    mask = np.zeros(n, dtype=bool)
    if excluded is not None:
        idx = np.fromiter(excluded, dtype=np.int64) if isinstance(excluded, set) else np.asarray(excluded)
        if idx.dtype == bool:
            mask = idx.copy()
        else:
            mask[idx] = True
    contrib = np.where((r >= pop.cost[i]) & ~mask, g.inverse_degree, 0.0)
    e = 1.0 + g.adjacency @ contrib
    e[mask] = np.nan
    return e


def h6_eia_ranked(g: Graph, pop: Population, budget: SeedBudget,
                  rng: np.random.Generator) -> SeedAssignment:
    e = np.stack([expected_immediate_adoption(g, pop, i) for i in range(pop.k)], axis=1)

    def pick(i, count, sets, remaining, resource):
        nodes = np.flatnonzero(remaining)
        return _rank(e[:, i], nodes, rng)[:count].tolist()

    return _round_robin(g, pop, budget, rng, pick, "EIA ranked")


def core_hill_climbing(g: Graph, pop: Population, i: int, count: int,
                       seeds: set[int], remaining: np.ndarray,
                       rng: np.random.Generator,
                       resource: np.ndarray | None = None) -> list[int]:
    """Greedy picks maximizing marginal one-step adoption of behavior ``i``.

    After each pick ``u``, every still-selectable neighbor loses the ``1/|N(u)|``
    that ``u`` contributed to its score (only if ``u`` could afford ``i``).
    """
    r = pop.resource if resource is None else resource
    e = expected_immediate_adoption(g, pop, i, excluded=seeds, resource=r)
    open_ = remaining.copy()
    picked: list[int] = []
    for _ in range(count):
        nodes = np.flatnonzero(open_)
        if nodes.size == 0:
            break
        scores = e[nodes]
        top = scores.max()
        ties = nodes[scores >= top - 1e-12]
        u = int(ties[rng.integers(ties.size)]) if ties.size > 1 else int(ties[0])
        picked.append(u)
        open_[u] = False
        if r[u] >= pop.cost[i]:
            nb = g.neighbors(u)
            nb = nb[open_[nb]]
            e[nb] -= g.inverse_degree[u]
    return picked


def h7_eia_hill_climbing(g: Graph, pop: Population, budget: SeedBudget,
                         rng: np.random.Generator) -> SeedAssignment:
    def pick(i, count, sets, remaining, resource):
        return core_hill_climbing(g, pop, i, count, sets[i], remaining, rng, resource)

    return _round_robin(g, pop, budget, rng, pick, "EIA hill climbing")


HEURISTICS: dict[str, Callable[..., SeedAssignment]] = {
    "H1": h1_random,
    "H2": h2_naive_degree_no_topup,
    "H3": h3_naive_degree_knapsack,
    "H4": h4_naive_degree_topup,
    "H5": h5_degree_resource_ranked,
    "H6": h6_eia_ranked,
    "H7": h7_eia_hill_climbing,
}


# --------------------------------------------------------------------------
# application and I/O
# --------------------------------------------------------------------------


def apply_seeds(pop: Population, assignment: SeedAssignment) -> Population:
    """Return a copy of ``pop`` with seeds adopted, pinned and topped up."""
    if len(assignment.per_behavior_sets) != pop.k:
        raise ValueError("assignment length does not match the behavior count")
    if not assignment.multi_behavior:
        seen: set[int] = set()
        for s in assignment.per_behavior_sets:
            if seen & s:
                raise ValueError(f"node(s) {sorted(seen & s)[:5]} seeded for two behaviors")
            seen |= s
    out = pop.copy()
    for v, r in assignment.topped_up.items():
        out.resource[v] = r
    for j, s in enumerate(assignment.per_behavior_sets):
        idx = np.fromiter(s, dtype=np.int64, count=len(s))
        out.adopted[idx, j] = True
        out.pinned[idx, j] = True
    spent = out.pinned.astype(np.float64) @ out.cost
    if np.any(spent > out.resource + 1e-12):
        v = int(np.flatnonzero(spent > out.resource + 1e-12)[0])
        raise ValueError(f"seed node {v} cannot afford its assigned behaviors")
    return out


def write_assignment(assignment: SeedAssignment, path: str | os.PathLike) -> None:
    """CSV with columns ``node_id, behavior_id, topped_up_to``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "behavior_id", "topped_up_to"])
        rows = sorted((v, j) for j, s in enumerate(assignment.per_behavior_sets) for v in s)
        for v, j in rows:
            t = assignment.topped_up.get(v)
            w.writerow([v, j, "" if t is None else repr(t)])


def read_assignment(path: str | os.PathLike, k: int) -> SeedAssignment:
    sets: list[set[int]] = [set() for _ in range(k)]
    topped: dict[int, float] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            v, j = int(row["node_id"]), int(row["behavior_id"])
            sets[j].add(v)
            if row["topped_up_to"]:
                topped[v] = float(row["topped_up_to"])
    multi = sum(len(s) for s in sets) != len(set().union(*sets))
    return SeedAssignment(sets, topped, multi_behavior=multi)
