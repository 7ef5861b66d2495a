from fractions import Fraction

import numpy as np

from cycap.core.fixtures import figure3_tour
from cycap.core.instance import build_instance, figure3_instance
from cycap.core.pipeline import Variant, cycap_once
from cycap.core.residual import build_separated, walk_cost
from cycap.core.tour import Tour
from cycap.solvers.detect import (
    bellman_ford_negative_cycle,
    decompose_circulation,
    floyd_warshall_full,
    karp_min_mean,
    min_cost_circulation,
    min_cycle_mean,
    predecessor_readout,
    residual_has_negative_cycle,
)


def figure3_separated():
    return build_separated(figure3_instance(), figure3_tour())


def test_figure3_floyd_warshall_diagonal():
    sep = figure3_separated()
    Dstar, _ = floyd_warshall_full(sep)
    assert Dstar[0, 0] < 0
    finite = sep.present()
    assert (Dstar[finite] <= sep.D[finite]).all()


def test_figure3_readout():
    sep = figure3_separated()
    candidates = predecessor_readout(*floyd_warshall_full(sep), sep)
    assert candidates
    assert all(c.cost == -25 and c.arc_count == 10 for c in candidates)


def test_figure3_karp():
    sep = figure3_separated()
    cycle = karp_min_mean(sep)
    assert cycle is not None
    assert cycle.mean == Fraction(-5, 2)
    assert cycle.cost == -25
    assert cycle.arc_count == 10
    assert min_cycle_mean(sep)[0] == Fraction(-5, 2)


def test_figure3_karp_is_minimum(cycle_oracle):
    assert cycle_oracle.min_mean(figure3_separated()) == Fraction(-5, 2)


def test_figure3_circulation():
    sep = figure3_separated()
    result = min_cost_circulation(sep)
    assert result.cost == -25
    assert len(result.arcs) == 10
    walks = decompose_circulation(result.arcs)
    assert len(walks) == 1
    assert walk_cost(sep, walks[0]) == -25


def test_no_negative_cycle_anywhere(flat_instance_factory, tour_factory):
    for seed in range(30):
        n = 4 + seed % 7
        tour = tour_factory(n, seed)
        sep = build_separated(flat_instance_factory(n, tour, seed), tour)

        Dstar, Pstar = floyd_warshall_full(sep)
        assert (np.diag(Dstar) >= 0).all()
        assert predecessor_readout(Dstar, Pstar, sep) == []
        assert karp_min_mean(sep) is None
        assert min_cost_circulation(sep).empty
        assert bellman_ford_negative_cycle(sep.D, sep.present()) is None


def test_readout_candidates_recompute(instance_factory, tour_factory):
    for seed in range(25):
        inst = instance_factory(8, seed)
        sep = build_separated(inst, tour_factory(8, seed))
        for c in predecessor_readout(*floyd_warshall_full(sep), sep):
            assert c.cost < 0
            assert walk_cost(sep, c.walk) == c.cost
            assert len(set(c.walk[:-1])) == c.arc_count
            assert c.walk[0] == c.walk[-1]


def test_floyd_warshall_agrees_with_bellman_ford(instance_factory, tour_factory):
    for seed in range(40):
        n = 5 + seed % 6
        sep = build_separated(instance_factory(n, seed), tour_factory(n, seed))
        Dstar, _ = floyd_warshall_full(sep)
        cycle = bellman_ford_negative_cycle(sep.D, sep.present())
        assert (cycle is not None) == bool((np.diag(Dstar) < 0).any())
        if cycle is not None:
            assert walk_cost(sep, cycle) < 0


def single_source_distances(sep, source):
    """Textbook Bellman-Ford from one vertex over the arcs of R'; None where unreachable."""
    present = sep.present()
    arcs = [(u, v, int(sep.D[u, v])) for u, v in zip(*np.nonzero(present))]
    dist = [None] * sep.size
    dist[source] = 0
    for _ in range(sep.size - 1):
        changed = False
        for u, v, w in arcs:
            if dist[u] is not None and (dist[v] is None or dist[u] + w < dist[v]):
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist


def test_floyd_warshall_distances_match_single_source(flat_instance_factory, tour_factory):
    for seed in range(30):
        n = 4 + seed % 5
        tour = tour_factory(n, seed)
        sep = build_separated(flat_instance_factory(n, tour, seed), tour)
        Dstar, _ = floyd_warshall_full(sep)
        assert (np.diag(Dstar) > 0).all()
        for s in range(sep.size):
            dist = single_source_distances(sep, s)
            for v in range(sep.size):
                if v == s:
                    continue
                if dist[v] is None:
                    assert Dstar[s, v] >= sep.sentinel
                else:
                    assert Dstar[s, v] == dist[v]


def test_predecessor_paths_sum_to_distances(flat_instance_factory, tour_factory):
    for seed in range(20):
        n = 4 + seed % 4
        tour = tour_factory(n, seed)
        sep = build_separated(flat_instance_factory(n, tour, seed), tour)
        Dstar, Pstar = floyd_warshall_full(sep)
        for s in range(sep.size):
            for v in range(sep.size):
                if v == s or Dstar[s, v] >= sep.sentinel:
                    continue
                path = [v]
                while path[-1] != s:
                    path.append(int(Pstar[s, path[-1]]))
                    assert len(path) <= sep.size
                assert walk_cost(sep, path[::-1]) == Dstar[s, v]


def test_karp_matches_exhaustive_minimum(instance_factory, tour_factory, cycle_oracle):
    for seed in range(200):
        n = 4 + seed % 4
        sep = build_separated(instance_factory(n, seed), tour_factory(n, seed))
        expected = cycle_oracle.min_mean(sep)
        cycle = karp_min_mean(sep)
        if expected is None or expected >= 0:
            assert cycle is None
        else:
            assert cycle is not None
            assert cycle.mean == expected
            assert walk_cost(sep, cycle.walk) == cycle.cost


def test_circulation_certificate_and_dominance(instance_factory, tour_factory):
    for seed in range(200):
        n = 4 + seed % 7
        sep = build_separated(instance_factory(n, seed), tour_factory(n, seed))
        result = min_cost_circulation(sep)
        assert not residual_has_negative_cycle(sep, result.arcs)
        assert result.cost == sum(int(sep.D[u, v]) for u, v in result.arcs)
        for c in predecessor_readout(*floyd_warshall_full(sep), sep):
            assert result.cost <= c.cost


def test_circulation_is_optimal(instance_factory, tour_factory, cycle_oracle):
    for seed in range(60):
        n = 4 + seed % 4
        sep = build_separated(instance_factory(n, seed), tour_factory(n, seed))
        assert min_cost_circulation(sep).cost == cycle_oracle.min_circulation(sep)


def test_circulation_splits_into_disjoint_cycles(instance_factory, tour_factory):
    for seed in range(30):
        sep = build_separated(instance_factory(10, seed), tour_factory(10, seed))
        result = min_cost_circulation(sep)
        walks = decompose_circulation(result.arcs)
        vertices = [v for w in walks for v in w[:-1]]
        assert len(vertices) == len(set(vertices)) == len(result.arcs)
        assert sum(walk_cost(sep, w) for w in walks) == result.cost
        assert all(walk_cost(sep, w) <= 0 for w in walks)


def test_zero_value_cycles_are_not_reported():
    inst = build_instance("zeros", np.zeros((6, 6), dtype=np.int64))
    tour = Tour.from_order(list(range(6)))
    sep = build_separated(inst, tour)
    Dstar, Pstar = floyd_warshall_full(sep)
    assert (np.diag(Dstar) == 0).all()
    assert predecessor_readout(Dstar, Pstar, sep) == []
    assert karp_min_mean(sep) is None
    assert min_cost_circulation(sep).empty
    assert bellman_ford_negative_cycle(sep.D, sep.present()) is None
    result, stats = cycap_once(inst, tour, Variant.C, np.random.default_rng(0))
    assert result is tour
    assert stats.candidates == 0
