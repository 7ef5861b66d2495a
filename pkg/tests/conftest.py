"""
Shared fixtures: random instances, random alternating walks in the separated
graph, and brute-force cycle oracles.
"""

from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import pytest

from cycap.core.instance import Instance, build_instance
from cycap.core.residual import SeparatedGraph
from cycap.core.tour import Tour, random_tour


def make_instance(
    n: int,
    seed: int,
    low: int = 1,
    high: int = 100,
    symmetric: bool = False,
) -> Instance:
    rng = np.random.default_rng(seed)
    matrix = rng.integers(low, high + 1, size=(n, n))
    if symmetric:
        upper = np.triu(matrix, 1)
        matrix = upper + upper.T
    np.fill_diagonal(matrix, 0)
    return build_instance(f"rand{n}_{seed}", matrix)


def make_flat_instance(n: int, tour: Tour, seed: int) -> Instance:
    """Tour arcs cost 1..5, every other arc at least 10: no negative alternating cycle."""
    rng = np.random.default_rng(seed)
    matrix = rng.integers(10, 60, size=(n, n))
    for i, j in tour.arcs():
        matrix[i, j] = rng.integers(1, 6)
    np.fill_diagonal(matrix, 0)
    return build_instance(f"flat{n}_{seed}", matrix)


def random_alternating_walk(sep: SeparatedGraph, rng: np.random.Generator) -> list[int]:
    """Closed simple walk of R' built by alternating insertion and removal arcs."""
    n = sep.n
    pred = [0] * n
    for i, j in enumerate(sep.tour.succ):
        pred[j] = i

    h = int(rng.integers(n))
    seq = [h]
    position = {h: 0}
    while True:
        targets = [k for k in range(n) if sep.has_arc(h, n + k)]
        k = int(rng.choice(targets))
        i = pred[k]
        seq += [n + k, i]
        if i in position:
            return seq[position[i]:]
        position[i] = len(seq) - 1
        h = i


def random_circulation_arcs(
    sep: SeparatedGraph,
    rng: np.random.Generator,
    attempts: int = 4,
) -> list[tuple[int, int]]:
    """Union of vertex-disjoint random alternating walks of R'."""
    used: set[int] = set()
    arcs: list[tuple[int, int]] = []
    for _ in range(attempts):
        walk = random_alternating_walk(sep, rng)
        if used & set(walk):
            continue
        used |= set(walk)
        arcs += [(walk[t], walk[t + 1]) for t in range(len(walk) - 1)]
    return arcs


def contracted_graph(sep: SeparatedGraph) -> dict[int, list[tuple[int, int]]]:
    """R' with every B vertex folded into its removal arc: h -> pred(k) costs c[h,k] - c[pred(k),k]."""
    n = sep.n
    out: dict[int, list[tuple[int, int]]] = {h: [] for h in range(n)}
    for b in range(n, 2 * n):
        i = int(np.nonzero(sep.present()[b])[0][0])
        for h in range(n):
            if sep.has_arc(h, b):
                out[h].append((i, int(sep.D[h, b] + sep.D[b, i])))
    return out


def simple_cycles(sep: SeparatedGraph) -> list[tuple[tuple[int, ...], int]]:
    """Every simple cycle of R' as (A vertices, cost), each listed once from its smallest vertex."""
    graph = contracted_graph(sep)
    found: list[tuple[tuple[int, ...], int]] = []

    def extend(start: int, path: list[int], cost: int) -> None:
        for v, w in graph[path[-1]]:
            if v == start:
                found.append((tuple(path), cost + w))
            elif v > start and v not in path:
                path.append(v)
                extend(start, path, cost + w)
                path.pop()

    for start in range(sep.n):
        extend(start, [start], 0)
    return found


def brute_min_mean(sep: SeparatedGraph) -> Optional[Fraction]:
    cycles = simple_cycles(sep)
    if not cycles:
        return None
    return min(Fraction(cost, 2 * len(vs)) for vs, cost in cycles)


def brute_min_circulation(sep: SeparatedGraph) -> int:
    """Cheapest union of vertex-disjoint cycles (empty union costs 0)."""
    cycles = []
    for vs, cost in simple_cycles(sep):
        mask = 0
        for v in vs:
            mask |= 1 << v
        cycles.append((mask, cost))

    full = (1 << sep.n) - 1
    best = [0] * (full + 1)
    for mask in range(1, full + 1):
        low = mask & -mask
        value = best[mask ^ low]
        for cmask, cost in cycles:
            if cmask & low and cmask & mask == cmask:
                value = min(value, cost + best[mask ^ cmask])
        best[mask] = value
    return best[full]


@pytest.fixture
def instance_factory() -> Callable[..., Instance]:
    return make_instance


@pytest.fixture
def flat_instance_factory() -> Callable[[int, Tour, int], Instance]:
    return make_flat_instance


@pytest.fixture
def alternating_walk() -> Callable[[SeparatedGraph, np.random.Generator], list[int]]:
    return random_alternating_walk


@pytest.fixture
def circulation_arcs() -> Callable[..., list[tuple[int, int]]]:
    return random_circulation_arcs


@pytest.fixture
def cycle_oracle():
    """Brute-force helpers over the simple cycles of a small separated graph."""
    class Oracle:
        cycles = staticmethod(simple_cycles)
        min_mean = staticmethod(brute_min_mean)
        min_circulation = staticmethod(brute_min_circulation)

    return Oracle


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def tour_factory() -> Callable[[int, int], Tour]:
    return lambda n, seed: random_tour(n, np.random.default_rng(seed))
