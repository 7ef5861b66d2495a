from itertools import combinations, permutations, product

import pytest

from cycap.core.fixtures import figure3_tour
from cycap.core.instance import build_instance, figure3_instance
from cycap.core.tour import Tour, tour_cost, validate_tour
from cycap.solvers.local_search import (
    OptSchedule,
    OptStep,
    SearchStats,
    k_opt_star,
    parse_schedule,
    run_schedule,
)


def all_tours(n):
    for rest in permutations(range(1, n)):
        yield Tour.from_order([0, *rest])


def shared_edges(a: Tour, b: Tour) -> int:
    edges = {frozenset(e) for e in b.arcs()}
    return sum(1 for e in a.arcs() if frozenset(e) in edges)


@pytest.mark.parametrize("k", [2, 3])
def test_figure3_tour_is_a_fixed_point(k):
    inst = figure3_instance()
    tour = figure3_tour()
    stats = SearchStats()
    result = k_opt_star(inst, tour, k, star=True, stats=stats)
    assert result == tour
    assert tour_cost(inst, result) == 70
    assert stats.total_moves == 0


def test_figure3_schedule_two_then_three():
    inst = figure3_instance()
    schedule = OptSchedule(steps=(OptStep.TWO_OPT, OptStep.THREE_OPT))
    assert tour_cost(inst, run_schedule(inst, figure3_tour(), schedule)) == 70


def three_opt_star_neighbours(tour: Tour):
    """Every tour one 3-opt* move away: 7 reconnections per arc triple, their reversals, and rev(T)."""
    t = tour.order(0)
    n = len(t)
    yield tour.reversed()
    for i, j, k in combinations(range(n), 3):
        head = t[k + 1:] + t[:i + 1]
        pieces = (t[i + 1:j + 1], t[j + 1:k + 1])
        for first, second in ((0, 1), (1, 0)):
            for rev_first, rev_second in product((False, True), repeat=2):
                if (first, rev_first, rev_second) == (0, False, False):
                    continue
                x = pieces[first][::-1] if rev_first else pieces[first]
                y = pieces[second][::-1] if rev_second else pieces[second]
                order = head + x + y
                yield Tour.from_order(order)
                yield Tour.from_order(order[::-1])


def test_three_opt_star_leaves_no_improving_move(instance_factory, tour_factory):
    for seed in range(3):
        inst = instance_factory(8, seed=3 + seed)
        start = tour_factory(8, 5 + seed)
        result = k_opt_star(inst, start, 3, star=True)
        cost = tour_cost(inst, result)
        assert validate_tour(result, 8)
        assert cost <= tour_cost(inst, start)

        neighbours = list(three_opt_star_neighbours(result))
        assert len(neighbours) == 1 + 56 * 14
        for other in neighbours:
            assert validate_tour(other, 8)
            assert tour_cost(inst, other) >= cost


@pytest.mark.parametrize("k", [2, 3])
def test_star_changes_nothing_on_symmetric_instances(instance_factory, tour_factory, k):
    for seed in range(10):
        inst = instance_factory(11, seed, symmetric=True)
        start = tour_factory(11, seed)
        with_star = k_opt_star(inst, start, k, star=True)
        without = k_opt_star(inst, start, k, star=False)
        assert tour_cost(inst, with_star) == tour_cost(inst, without)


def test_two_opt_symmetric_local_optimum(instance_factory, tour_factory):
    inst = instance_factory(8, seed=9, symmetric=True)
    result = k_opt_star(inst, tour_factory(8, 1), 2, star=False)
    cost = tour_cost(inst, result)
    for other in all_tours(8):
        if shared_edges(other, result) >= 6:
            assert tour_cost(inst, other) >= cost


def test_schedule_output_is_optimal_for_both_move_sets(instance_factory, tour_factory):
    inst = instance_factory(9, seed=21)
    result = run_schedule(inst, tour_factory(9, 2), parse_schedule("2+3", star=True))
    assert k_opt_star(inst, result, 2) == result
    assert k_opt_star(inst, result, 3) == result


def test_three_vertex_reversal():
    inst = build_instance("tri", [[0, 1, 9], [9, 0, 1], [1, 9, 0]])
    worse = Tour.from_external([1, 3, 2])
    result = k_opt_star(inst, worse, 2, star=True)
    assert result == Tour.from_external([1, 2, 3])


def test_directed_costs_are_not_symmetrised(instance_factory, tour_factory):
    inst = instance_factory(12, seed=4)
    for k in (2, 3):
        for star in (True, False):
            start = tour_factory(12, k)
            result = k_opt_star(inst, start, k, star=star)
            assert validate_tour(result, 12)
            assert tour_cost(inst, result) <= tour_cost(inst, start)


def test_two_opt_is_a_fixed_point_of_itself(instance_factory, tour_factory):
    inst = instance_factory(10, seed=8)
    once = k_opt_star(inst, tour_factory(10, 0), 2)
    schedule = OptSchedule(steps=(OptStep.TWO_OPT,))
    assert run_schedule(inst, once, schedule) == once


def test_invalid_k():
    with pytest.raises(ValueError, match="k must be 2 or 3"):
        k_opt_star(figure3_instance(), figure3_tour(), 4)


def test_time_cap_marks_stats(instance_factory, tour_factory):
    inst = instance_factory(60, seed=1)
    stats = SearchStats()
    schedule = OptSchedule(steps=(OptStep.THREE_OPT,), time_cap=1e-9)
    result = run_schedule(inst, tour_factory(60, 1), schedule, stats)
    assert validate_tour(result, 60)
    assert stats.capped


def test_parse_schedule():
    schedule = parse_schedule("2+3", star=False, time_cap=2.5)
    assert schedule.steps == (OptStep.TWO_OPT, OptStep.THREE_OPT)
    assert schedule.label == "2+3"
    assert not schedule.star
    assert schedule.time_cap == 2.5
    with pytest.raises(ValueError, match="unknown schedule"):
        parse_schedule("4")


def test_search_stats_accumulate():
    stats = SearchStats()
    stats.record(2, 3)
    stats.record(3, 1)
    stats.record(2, 2)
    assert stats.moves == {2: 5, 3: 1}
    assert stats.total_moves == 6
