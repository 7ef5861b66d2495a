"""
cycap - Tour Module
Tours, post-cancel flow states, cost evaluation and subtour decomposition.

Internally vertices are 0-based; `to_external` / `from_external` convert to
the 1-based labels used by TSPLIB and in printed tours.
"""

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from cycap.core.instance import Instance


@dataclass(frozen=True)
class Tour:
    """Hamiltonian cycle stored as a successor map."""

    succ: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.succ)

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "Tour":
        n = len(order)
        succ = [0] * n
        for pos, v in enumerate(order):
            succ[v] = order[(pos + 1) % n]
        return cls(tuple(int(v) for v in succ))

    @classmethod
    def from_external(cls, labels: Sequence[int]) -> "Tour":
        return cls.from_order([v - 1 for v in labels])

    def order(self, start: int = 0) -> list[int]:
        seq = [start]
        v = self.succ[start]
        while v != start and len(seq) <= self.n:
            seq.append(v)
            v = self.succ[v]
        return seq

    def to_external(self) -> list[int]:
        return [v + 1 for v in self.order(0)]

    def arcs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in enumerate(self.succ)]

    def reversed(self) -> "Tour":
        pred = [0] * self.n
        for i, j in enumerate(self.succ):
            pred[j] = i
        return Tour(tuple(pred))


@dataclass(frozen=True)
class FlowState:
    """0,1-circulation after a cancel: subtours plus isolated vertices."""

    succ: Mapping[int, int]
    isolated: frozenset[int] = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return len(self.succ) + len(self.isolated)

    def arcs(self) -> list[tuple[int, int]]:
        return sorted(self.succ.items())


@dataclass(frozen=True)
class SubtourDecomposition:
    subtours: list[tuple[int, ...]]
    isolated: frozenset[int]


def tour_cost(instance: Instance, tour: Tour) -> int:
    succ = np.fromiter(tour.succ, dtype=np.int64, count=tour.n)
    return int(instance.cost[np.arange(tour.n), succ].sum())


def flow_cost(instance: Instance, flow: FlowState) -> int:
    return sum(instance.c(i, j) for i, j in flow.succ.items())


def flow_from_tour(tour: Tour) -> FlowState:
    return FlowState(succ=dict(enumerate(tour.succ)), isolated=frozenset())


def random_tour(n: int, rng: np.random.Generator) -> Tour:
    """Uniform Hamiltonian cycle from a Fisher-Yates permutation."""
    return Tour.from_order([int(v) for v in rng.permutation(n)])


def decompose(flow: FlowState) -> SubtourDecomposition:
    """Split a flow into its cycles, each starting at its minimum vertex."""
    seen: set[int] = set()
    subtours: list[tuple[int, ...]] = []
    for start in sorted(flow.succ):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        v = flow.succ[start]
        while v != start:
            cycle.append(v)
            seen.add(v)
            v = flow.succ[v]
        subtours.append(tuple(cycle))
    return SubtourDecomposition(subtours=subtours, isolated=frozenset(flow.isolated))


def validate_tour(tour: Tour, n: int) -> bool:
    succ = tour.succ
    if len(succ) != n or sorted(succ) != list(range(n)):
        return False
    if any(succ[i] == i for i in range(n)):
        return False
    v, steps = succ[0], 1
    while v != 0 and steps <= n:
        v = succ[v]
        steps += 1
    return steps == n


def format_tour(tour: Tour) -> str:
    return " ".join(str(v) for v in tour.to_external())


def tour_from_flow(flow: FlowState) -> Tour:
    """Convert a flow that is a single spanning cycle into a Tour."""
    n = flow.n
    return Tour(tuple(flow.succ[i] for i in range(n)))

