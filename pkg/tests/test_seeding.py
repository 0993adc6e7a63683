import logging
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcdiffusion.graph import Graph, generate_preferential_attachment, generate_small_world
from rcdiffusion.model import DEFAULT_BEHAVIORS, init_population, make_behaviors
from rcdiffusion.seeding import (HEURISTICS, SeedAssignment, SeedBudget, allocate_counts,
                                 apply_seeds, core_hill_climbing,
                                 expected_immediate_adoption, h1_random,
                                 h2_naive_degree_no_topup, h3_naive_degree_knapsack,
                                 h4_naive_degree_topup, h5_degree_resource_ranked,
                                 h6_eia_ranked, h7_eia_hill_climbing, read_assignment,
                                 sufficient_neighbor_counts, write_assignment)

from conftest import make_pop, path_graph, star_graph

# Two hubs (4 and 7) that are adjacent and share neighbor 0.
EIGHT_NODE_EDGES = [(0, 4), (0, 6), (0, 7), (1, 2), (1, 3), (3, 4), (4, 6), (4, 7), (5, 7)]


def oracle_e(adj, resource, cost, excluded=()):
    """e(v) = 1 + sum of 1/deg(u) over affordable, non-excluded neighbors u."""
    return [1 + sum(Fraction(1, len(adj[u])) for u in adj[v]
                    if resource[u] >= cost and u not in excluded)
            for v in range(len(adj))]


def adjacency(g):
    return [g.neighbors(v).tolist() for v in range(g.node_count)]


def oracle_largest_remainder(total, weights):
    weights = [Fraction(w).limit_denominator(10**6) for w in weights]
    shares = [total * w / sum(weights) for w in weights]
    base = [int(s) for s in shares]
    order = sorted(range(len(shares)), key=lambda i: (-(shares[i] - base[i]), i))
    for i in order[:total - sum(base)]:
        base[i] += 1
    return tuple(base)


class TestAllocation:
    def test_unif_51(self):
        assert allocate_counts(51, DEFAULT_BEHAVIORS, "unif").per_behavior == (17, 17, 17)

    def test_prop_51(self):
        got = allocate_counts(51, DEFAULT_BEHAVIORS, "prop").per_behavior
        assert got == oracle_largest_remainder(51, [0.2, 0.5, 0.7]) == (7, 18, 26)

    def test_high_and_low(self):
        assert allocate_counts(10, DEFAULT_BEHAVIORS, "high").per_behavior == (0, 0, 10)
        assert allocate_counts(10, DEFAULT_BEHAVIORS, "low").per_behavior == (10, 0, 0)

    def test_inv(self):
        got = allocate_counts(51, DEFAULT_BEHAVIORS, "inv").per_behavior
        assert got == oracle_largest_remainder(51, [1 / 0.2, 1 / 0.5, 1 / 0.7])

    @settings(max_examples=200, deadline=None)
    @given(total=st.integers(1, 500),
           q=st.lists(st.integers(0, 9), min_size=3, max_size=3).filter(lambda x: sum(x) > 0))
    def test_target_sums_and_matches_oracle(self, total, q):
        got = allocate_counts(total, DEFAULT_BEHAVIORS, "target", q).per_behavior
        assert sum(got) == total
        assert got == oracle_largest_remainder(total, q)

    @pytest.mark.parametrize("target", [(0.5, 0.5), (0.5, -0.1, 0.6), None])
    def test_bad_target(self, target):
        with pytest.raises(ValueError):
            allocate_counts(10, DEFAULT_BEHAVIORS, "target", target)

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            allocate_counts(10, DEFAULT_BEHAVIORS, "zipf")

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            SeedBudget(3, (1, 1))


def k5():
    return Graph.from_edges(5, [(u, v) for u in range(5) for v in range(u + 1, 5)])


class TestRandom:
    def test_uniform_over_k5(self):
        g = k5()
        pop = make_pop(g, [0.5], 0.1)
        rng = np.random.default_rng(0)
        hits = Counter()
        for _ in range(10_000):
            hits.update(h1_random(g, pop, SeedBudget(1, (1,)), rng).seed_nodes)
        assert all(abs(hits[v] - 2000) <= 150 for v in range(5))

    def test_full_budget_seeds_everyone_once(self, rng):
        g = generate_small_world(30, 0.2, rng)
        pop = init_population(g, DEFAULT_BEHAVIORS, 0.5, rng)
        a = h1_random(g, pop, allocate_counts(30, pop.behaviors, "unif"), rng)
        assert sorted(v for s in a.per_behavior_sets for v in s) == list(range(30))

    def test_over_budget(self):
        g = k5()
        with pytest.raises(ValueError):
            h1_random(g, make_pop(g, [0.5], 1.0), SeedBudget(6, (6,)), np.random.default_rng(0))


class TestDegreeWalk:
    def test_h2_consumes_unaffordable_hub(self):
        g = star_graph(4)
        pop = make_pop(g, [0.7], [0.1, 0.9, 0.9, 0.2, 0.9])
        a = h2_naive_degree_no_topup(g, pop, SeedBudget(1, (1,)), np.random.default_rng(3))
        assert 0 not in a.seed_nodes and len(a.seed_nodes) == 1
        assert a.topped_up == {} and not a.partial

    def test_h2_partial_when_nobody_can_afford(self, caplog):
        g = star_graph(3)
        pop = make_pop(g, [0.7], 0.1)
        with caplog.at_level(logging.WARNING):
            a = h2_naive_degree_no_topup(g, pop, SeedBudget(2, (2,)), np.random.default_rng(0))
        assert a.partial and a.seed_nodes == set()
        assert "unassigned" in caplog.text

    def test_h4_tops_up(self):
        g = star_graph(4)
        pop = make_pop(g, [0.7], [0.1, 0.9, 0.9, 0.9, 0.9])
        a = h4_naive_degree_topup(g, pop, SeedBudget(1, (1,)), np.random.default_rng(0))
        assert a.seed_nodes == {0} and a.topped_up == {0: 0.7}
        assert apply_seeds(pop, a).resource[0] == 0.7

    def test_h4_leaves_rich_nodes_alone(self):
        g = star_graph(4)
        pop = make_pop(g, [0.2], 0.9)
        a = h4_naive_degree_topup(g, pop, SeedBudget(1, (1,)), np.random.default_rng(0))
        assert a.seed_nodes == {0} and a.topped_up == {}

    def test_h4_always_exact(self, rng):
        g = generate_preferential_attachment(200, rng)
        pop = init_population(g, DEFAULT_BEHAVIORS, 0.5, rng)
        budget = allocate_counts(51, pop.behaviors, "prop")
        assert h4_naive_degree_topup(g, pop, budget, rng).counts() == budget.per_behavior

    def test_star_center_first(self):
        g = star_graph(6)
        pop = make_pop(g, [0.5], 0.8)
        for h in (h2_naive_degree_no_topup, h4_naive_degree_topup):
            assert h(g, pop, SeedBudget(1, (1,)), np.random.default_rng(1)).seed_nodes == {0}

    def test_h3_pins_knapsack_set(self):
        g = star_graph(6)
        pop = make_pop(g, [0.2, 0.5, 0.7], 0.05, w=1.0)
        pop.resource[0] = 0.9
        a = h3_naive_degree_knapsack(g, pop, SeedBudget(3, (1, 1, 1)), np.random.default_rng(0))
        assert a.multi_behavior
        assert [0 in s for s in a.per_behavior_sets] == [True, False, True]
        assert a.topped_up == {}
        seeded = apply_seeds(pop, a)
        assert seeded.adopted[0].tolist() == [True, False, True]

    def test_h3_skips_poor_nodes(self):
        g = star_graph(3)
        pop = make_pop(g, [0.2, 0.5, 0.7], 0.1)
        a = h3_naive_degree_knapsack(g, pop, SeedBudget(3, (1, 1, 1)), np.random.default_rng(0))
        assert a.partial and a.seed_nodes == set()


class TestDegreeResource:
    def test_counts(self):
        g = star_graph(5)
        pop = make_pop(g, [0.2, 0.5], [0.0, 0.6, 0.5, 0.9, 0.1, 0.3])
        assert sufficient_neighbor_counts(g, pop)[0].tolist() == [4, 3]

    def test_rich_neighbors_give_degree(self, rng):
        g = generate_preferential_attachment(50, rng)
        pop = make_pop(g, [0.2, 0.5, 0.7], 1.0)
        d = sufficient_neighbor_counts(g, pop)
        assert all(np.array_equal(d[:, i], g.degree) for i in range(3))

    @pytest.mark.parametrize("center_r", [0.3, 0.6])
    def test_four_node_star(self, center_r):
        g = star_graph(3)
        resource = [center_r, 0.1, 0.1, 0.9]
        pop = make_pop(g, [0.5], resource)
        adj = adjacency(g)
        d = [sum(resource[u] >= 0.5 for u in adj[v]) for v in range(4)]
        best = {v for v in range(4) if d[v] == max(d)}
        picked = set()
        for s in range(200):
            a = h5_degree_resource_ranked(g, pop, SeedBudget(1, (1,)), np.random.default_rng(s))
            picked |= a.seed_nodes
        assert picked == best


class TestExpectedImmediateAdoption:
    def test_star(self):
        g = star_graph(10)
        e = expected_immediate_adoption(g, make_pop(g, [0.5], 1.0), 0)
        assert e[0] == pytest.approx(11)
        assert e[1:] == pytest.approx([1.1] * 10)

    def test_triangle(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
        assert expected_immediate_adoption(g, make_pop(g, [0.5], 1.0), 0) == pytest.approx([2, 2, 2])

    def test_path(self):
        g = path_graph(5)
        e = expected_immediate_adoption(g, make_pop(g, [0.5], 1.0), 0)
        assert e == pytest.approx([1.5, 2.5, 2.0, 2.5, 1.5])

    def test_poor_neighbors_contribute_nothing(self):
        g = star_graph(4)
        e = expected_immediate_adoption(g, make_pop(g, [0.5], [1.0, 0.1, 0.1, 0.1, 0.1]), 0)
        assert e[0] == 1

    def test_excluded_are_nan(self):
        g = path_graph(3)
        e = expected_immediate_adoption(g, make_pop(g, [0.5], 1.0), 0, excluded={1})
        assert np.isnan(e[1]) and e[0] == 1 and e[2] == 1

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_oracle_and_bounds(self, seed):
        rng = np.random.default_rng(seed)
        g = generate_preferential_attachment(40, rng)
        pop = init_population(g, DEFAULT_BEHAVIORS, 0.5, rng)
        adj = adjacency(g)
        for i in range(3):
            e = expected_immediate_adoption(g, pop, i)
            want = oracle_e(adj, pop.resource.tolist(), pop.cost[i])
            assert e == pytest.approx([float(x) for x in want])
            assert np.all(e >= 1) and np.all(e <= 1 + g.degree)


class TestRanked:
    def test_h6_path_picks_a_tie_winner(self):
        g = path_graph(5)
        pop = make_pop(g, [0.5], 1.0)
        seen = set()
        for s in range(50):
            seen |= h6_eia_ranked(g, pop, SeedBudget(1, (1,)), np.random.default_rng(s)).seed_nodes
        assert seen == {1, 3}
        a = h6_eia_ranked(g, pop, SeedBudget(1, (1,)), np.random.default_rng(9))
        b = h6_eia_ranked(g, pop, SeedBudget(1, (1,)), np.random.default_rng(9))
        assert a.per_behavior_sets == b.per_behavior_sets

    def test_identical_costs_stay_disjoint(self, rng):
        g = generate_preferential_attachment(100, rng)
        pop = make_pop(g, [0.5, 0.5, 0.5], 1.0)
        for h in (h5_degree_resource_ranked, h6_eia_ranked, h7_eia_hill_climbing):
            a = h(g, pop, SeedBudget(30, (10, 10, 10)), rng)
            assert a.counts() == (10, 10, 10)
            assert len(a.seed_nodes) == 30


class TestHillClimbing:
    def eight(self):
        g = Graph.from_edges(8, EIGHT_NODE_EDGES)
        return g, make_pop(g, [0.5], 1.0)

    def test_budget_one_matches_h6(self):
        g, pop = self.eight()
        b = SeedBudget(1, (1,))
        rng = np.random.default_rng(0)
        assert h7_eia_hill_climbing(g, pop, b, rng).seed_nodes == h6_eia_ranked(g, pop, b, rng).seed_nodes == {4}

    def test_second_pick_differs_from_ranking(self):
        g, pop = self.eight()
        adj = adjacency(g)
        e0 = oracle_e(adj, [1.0] * 8, 0.5)
        ranked = sorted(range(8), key=lambda v: -e0[v])[:2]
        first = max(range(8), key=lambda v: e0[v])
        e1 = oracle_e(adj, [1.0] * 8, 0.5, excluded={first})
        second = max((v for v in range(8) if v != first), key=lambda v: e1[v])
        assert set(ranked) == {4, 7} and {first, second} == {4, 1}
        b = SeedBudget(2, (2,))
        rng = np.random.default_rng(0)
        assert h6_eia_ranked(g, pop, b, rng).seed_nodes == set(ranked)
        assert h7_eia_hill_climbing(g, pop, b, rng).seed_nodes == {first, second}

    def test_two_stars_get_one_pick_each(self):
        edges = [(0, i) for i in range(1, 6)] + [(6, i) for i in range(7, 10)]
        g = Graph.from_edges(10, edges)
        pop = make_pop(g, [0.5], 1.0)
        a = h7_eia_hill_climbing(g, pop, SeedBudget(2, (2,)), np.random.default_rng(0))
        assert a.seed_nodes == {0, 6}

    def test_poor_pick_does_not_decrement(self):
        g = path_graph(3)
        pop = make_pop(g, [0.5], [1.0, 0.1, 1.0])
        rng = np.random.default_rng(0)
        # node 1 scores 3 and is picked first; being poor it never fed its neighbors
        picks = core_hill_climbing(g, pop, 0, 2, set(), np.ones(3, dtype=bool), rng)
        assert picks[0] == 1
        e = expected_immediate_adoption(g, pop, 0)
        assert e[0] == e[2] == 1.0

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), count=st.integers(1, 12))
    def test_each_pick_maximizes_recomputed_score(self, seed, count):
        rng = np.random.default_rng(seed)
        g = generate_small_world(40, 0.4, rng)
        pop = init_population(g, DEFAULT_BEHAVIORS, 0.5, rng)
        i = int(rng.integers(3))
        picks = core_hill_climbing(g, pop, i, count, set(), np.ones(40, dtype=bool), rng)
        adj = adjacency(g)
        r = pop.resource.tolist()
        chosen: set[int] = set()
        for u in picks:
            e = oracle_e(adj, r, pop.cost[i], excluded=chosen)
            best = max(e[v] for v in range(40) if v not in chosen)
            assert abs(float(e[u] - best)) < 1e-9
            chosen.add(u)
        assert len(set(picks)) == count


@pytest.mark.parametrize("name", sorted(HEURISTICS))
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dist=st.sampled_from(["low", "inv", "unif", "prop", "high"]))
def test_heuristic_contract(name, seed, dist):
    rng = np.random.default_rng(seed)
    g = generate_preferential_attachment(150, rng)
    pop = init_population(g, DEFAULT_BEHAVIORS, 0.5, rng)
    budget = allocate_counts(15, pop.behaviors, dist)
    a = HEURISTICS[name](g, pop, budget, rng)
    if not a.multi_behavior:
        assert sum(a.counts()) == len(a.seed_nodes)
    if a.partial:
        assert all(c <= b for c, b in zip(a.counts(), budget.per_behavior))
    elif name != "H3":
        assert a.counts() == budget.per_behavior
    else:
        assert all(c >= b for c, b in zip(a.counts(), budget.per_behavior))
    if name in ("H2", "H3"):
        assert a.topped_up == {}
    seeded = apply_seeds(pop, a)
    seeded.check_invariants()
    assert np.array_equal(pop.adopted, np.zeros_like(pop.adopted))


def test_single_behavior_reduction_to_degree_ranking(rng):
    g = generate_preferential_attachment(120, rng)
    pop = make_pop(g, [1.0], 1.0)
    budget = SeedBudget(10, (10,))
    top = sorted(g.degree.tolist(), reverse=True)[:10]
    for h in (h2_naive_degree_no_topup, h3_naive_degree_knapsack,
              h4_naive_degree_topup, h5_degree_resource_ranked):
        a = h(g, pop, budget, rng)
        assert sorted(g.degree[list(a.seed_nodes)].tolist(), reverse=True) == top
    e = expected_immediate_adoption(g, pop, 0)
    want = oracle_e(adjacency(g), [1.0] * 120, 1.0)
    assert e == pytest.approx([float(x) for x in want])


class TestApply:
    def test_empty(self, rng):
        g = path_graph(4)
        pop = make_pop(g, [0.2, 0.5], 0.3)
        out = apply_seeds(pop, SeedAssignment([set(), set()]))
        assert np.array_equal(out.resource, pop.resource)
        assert not out.adopted.any() and not out.pinned.any()

    def test_top_up_exact(self):
        g = path_graph(3)
        pop = make_pop(g, [0.2, 0.7], 0.1)
        out = apply_seeds(pop, SeedAssignment([set(), {1}], {1: 0.7}))
        assert out.resource[1] == 0.7 and out.pinned[1, 1] and out.adopted[1, 1]
        assert pop.resource[1] == 0.1

    def test_overlap_rejected(self):
        g = path_graph(3)
        with pytest.raises(ValueError):
            apply_seeds(make_pop(g, [0.2, 0.5], 1.0), SeedAssignment([{0}, {0}]))

    def test_unaffordable_rejected(self):
        g = path_graph(3)
        with pytest.raises(ValueError):
            apply_seeds(make_pop(g, [0.7], 0.1), SeedAssignment([{0}]))

    def test_csv_round_trip(self, tmp_path):
        a = SeedAssignment([{3, 1}, {0}, {2}], {0: 0.5})
        write_assignment(a, tmp_path / "s.csv")
        assert (tmp_path / "s.csv").read_text().splitlines()[:2] == ["node_id,behavior_id,topped_up_to", "0,1,0.5"]
        b = read_assignment(tmp_path / "s.csv", 3)
        assert b.per_behavior_sets == a.per_behavior_sets
        assert b.topped_up == a.topped_up and not b.multi_behavior
        write_assignment(SeedAssignment([{0}, set(), {0}], multi_behavior=True), tmp_path / "m.csv")
        assert read_assignment(tmp_path / "m.csv", 3).multi_behavior
