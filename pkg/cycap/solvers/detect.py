"""
cycap - Detection Module
Negative-cycle and circulation detection over the separated graph R'.

Three back-ends, one per variant:
    F  floyd_warshall_full + predecessor_readout (every negative cycle the
       predecessor matrix exposes)
    M  karp_min_mean (one minimum-mean cycle)
    C  min_cost_circulation (an optimal 0,1-circulation)

All costs are exact integers; means are `fractions.Fraction`.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from cycap.config import Limits
from cycap.core.residual import ABSENT_PRED, SeparatedGraph, walk_cost
from cycap.errors import InvariantViolation

logger = logging.getLogger(__name__)

Arc = tuple[int, int]

# dense "no arc" weight for Karp and Bellman-Ford tables; two of them still fit in int64
_INF = 2 ** 61
_CARRY = -2


@dataclass(frozen=True)
class CycleCandidate:
    walk: tuple[int, ...]
    cost: int

    @property
    def arc_count(self) -> int:
        return len(self.walk) - 1

    @property
    def mean(self) -> Fraction:
        return Fraction(self.cost, self.arc_count)

    def arcs(self) -> list[Arc]:
        return [(self.walk[t], self.walk[t + 1]) for t in range(self.arc_count)]


@dataclass(frozen=True)
class CirculationResult:
    arcs: frozenset[Arc]
    cost: int
    cancellations: int = 0

    @property
    def empty(self) -> bool:
        return not self.arcs


def _walk_arcs(walk: Sequence[int]) -> list[Arc]:
    return [(int(walk[t]), int(walk[t + 1])) for t in range(len(walk) - 1)]


# --- Floyd-Warshall (variant F) ---

def floyd_warshall_full(sep: SeparatedGraph) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs relaxation over every pivot, with predecessor tracking.

    Never stops early on a negative diagonal. Values saturate at
    `Limits.DISTANCE_FLOOR` and just below the sentinel.
    """
    D = np.array(sep.D, dtype=np.int64)
    P = np.array(sep.P, dtype=np.int64)
    reach = D < sep.sentinel
    floor, ceil = Limits.DISTANCE_FLOOR, sep.sentinel - 1

    for k in range(sep.size):
        col, row = D[:, k].copy(), D[k, :].copy()
        via = reach[:, k][:, None] & reach[k, :][None, :]
        cand = np.clip(col[:, None] + row[None, :], floor, ceil)
        better = via & (~reach | (cand < D))
        if not better.any():
            continue
        D = np.where(better, cand, D)
        P = np.where(better, P[k, :][None, :], P)
        reach |= better

    negative = int((np.diag(D) < 0).sum())
    logger.debug("floyd-warshall: %d vertices on negative cycles", negative)
    return D, P


def predecessor_readout(Dstar: np.ndarray, Pstar: np.ndarray, sep: SeparatedGraph) -> list[CycleCandidate]:
    """Backtrack P* from every target j for each source s with D*[s][s] < 0."""
    size = sep.size
    seen: set[frozenset[Arc]] = set()
    found: list[CycleCandidate] = []

    for s in np.nonzero(np.diag(Dstar) < 0)[0].tolist():
        for j in range(size):
            visits = [j]
            position = {j: 0}
            v = j
            walk = None
            for _ in range(size + 1):
                p = int(Pstar[s, v])
                if p == ABSENT_PRED:
                    break
                if p in position:
                    idx = position[p]
                    # visits[t + 1] precedes visits[t], so the cycle runs backwards through the list
                    walk = [visits[idx]] + visits[:idx:-1] + [visits[idx]]
                    break
                if p == s:
                    break
                position[p] = len(visits)
                visits.append(p)
                v = p
            if walk is None or len(walk) < 3:
                continue

            arcs = _walk_arcs(walk)
            if not all(sep.has_arc(a, b) for a, b in arcs):
                continue
            key = frozenset(arcs)
            if key in seen:
                continue
            cost = walk_cost(sep, walk)
            if cost < 0:
                seen.add(key)
                found.append(CycleCandidate(walk=tuple(walk), cost=cost))

    logger.info("predecessor readout: %d negative cycles", len(found))
    return found


# --- Karp minimum mean cycle (variant M) ---

def _karp_table(sep: SeparatedGraph) -> tuple[np.ndarray, np.ndarray]:
    N = sep.size
    W = np.where(sep.present(), sep.D, _INF).astype(np.int64)
    d = np.full((N + 1, N), _INF, dtype=np.int64)
    parent = np.full((N + 1, N), ABSENT_PRED, dtype=np.int64)
    d[0, :] = 0
    for k in range(1, N + 1):
        cand = np.minimum(d[k - 1][:, None] + W, _INF)
        parent[k] = cand.argmin(axis=0)
        d[k] = cand.min(axis=0)
        parent[k][d[k] >= _INF] = ABSENT_PRED
    return d, parent


def _karp_value(d: np.ndarray) -> Optional[tuple[Fraction, int]]:
    N = d.shape[1]
    best: Optional[tuple[Fraction, int]] = None
    for v in range(N):
        if d[N, v] >= _INF:
            continue
        worst = max(
            Fraction(int(d[N, v]) - int(d[k, v]), N - k)
            for k in range(N)
            if d[k, v] < _INF
        )
        if best is None or worst < best[0]:
            best = (worst, v)
    return best


def min_cycle_mean(sep: SeparatedGraph) -> Optional[tuple[Fraction, int]]:
    """Karp's value min_v max_k (d_N(v) - d_k(v)) / (N - k) and its argmin vertex."""
    d, _ = _karp_table(sep)
    return _karp_value(d)


def _simple_cycles_on(sequence: list[int]) -> list[list[int]]:
    """Closed sub-walks of a walk that repeat no inner vertex."""
    cycles = []
    last: dict[int, int] = {}
    for pos, v in enumerate(sequence):
        if v in last:
            segment = sequence[last[v]:pos + 1]
            if len(set(segment[:-1])) == len(segment) - 1:
                cycles.append(segment)
        last[v] = pos
    return cycles


def karp_min_mean(sep: SeparatedGraph) -> Optional[CycleCandidate]:
    """Minimum-mean cycle of R', or None when the minimum mean is not negative."""
    N = sep.size
    d, parent = _karp_table(sep)
    best = _karp_value(d)
    if best is None or best[0] >= 0:
        logger.info("karp: no negative-mean cycle")
        return None
    lam, v = best

    # x_N = v, x_{k-1} = parent[k][x_k]; the N-arc walk x_0 -> ... -> x_N
    chain = [v]
    for k in range(N, 0, -1):
        chain.append(int(parent[k, chain[-1]]))
    chain.reverse()

    cycles = [CycleCandidate(walk=tuple(c), cost=walk_cost(sep, c)) for c in _simple_cycles_on(chain)]
    exact = [c for c in cycles if c.mean == lam]
    if not exact:
        raise InvariantViolation(f"karp walk ending at vertex {v} holds no cycle of mean {lam}")
    chosen = exact[0]
    logger.info("karp: mean %s over %d arcs", chosen.mean, chosen.arc_count)
    return chosen


# --- Bellman-Ford and cycle canceling (variant C) ---

def bellman_ford_negative_cycle(weights: np.ndarray, present: np.ndarray) -> Optional[list[int]]:
    """Negative cycle of a dense weighted digraph as a closed walk, or None.

    Distances start at 0 everywhere (implicit zero-cost super-source);
    d_k(v) is the cheapest walk of at most k arcs. A vertex still improving at
    level V ends an exact V-arc walk, and any closed sub-walk of it is negative.
    """
    V = weights.shape[0]
    W = np.where(present, weights, _INF).astype(np.int64)
    dist = np.zeros(V, dtype=np.int64)
    parents = []
    for _ in range(V):
        cand = np.minimum(dist[:, None] + W, _INF)
        best = cand.min(axis=0)
        improve = best < dist
        if not improve.any():
            return None
        parents.append(np.where(improve, cand.argmin(axis=0), _CARRY))
        dist = np.where(improve, best, dist)

    v = int(np.argmax(improve))
    walk = [v]
    for level in range(V - 1, -1, -1):
        p = int(parents[level][walk[-1]])
        if p != _CARRY:
            walk.append(p)
    walk.reverse()

    cycles = _simple_cycles_on(walk)
    if not cycles:
        raise InvariantViolation("bellman-ford walk closes no cycle")
    return cycles[0]


def residual_network(sep: SeparatedGraph, circulation: Iterable[Arc]) -> tuple[np.ndarray, np.ndarray]:
    """Dense residual weights of R' under a 0,1-flow (R' has no antiparallel arcs)."""
    present = sep.present().copy()
    weights = np.array(sep.D, dtype=np.int64)
    for u, v in circulation:
        present[u, v] = False
        present[v, u] = True
        weights[v, u] = -int(sep.D[u, v])
    return weights, present


def residual_has_negative_cycle(sep: SeparatedGraph, circulation: Iterable[Arc]) -> bool:
    weights, present = residual_network(sep, circulation)
    return bellman_ford_negative_cycle(weights, present) is not None


def _check_conservation(size: int, arcs: Iterable[Arc]) -> None:
    out_deg = np.zeros(size, dtype=np.int64)
    in_deg = np.zeros(size, dtype=np.int64)
    for u, v in arcs:
        out_deg[u] += 1
        in_deg[v] += 1
    if not np.array_equal(out_deg, in_deg) or out_deg.max(initial=0) > 1:
        raise InvariantViolation("circulation violates flow conservation")


def min_cost_circulation(sep: SeparatedGraph) -> CirculationResult:
    """Optimal unit-capacity circulation on R' by negative-cycle canceling."""
    flow: set[Arc] = set()
    cancellations = 0
    while True:
        weights, present = residual_network(sep, flow)
        cycle = bellman_ford_negative_cycle(weights, present)
        if cycle is None:
            break
        for u, v in _walk_arcs(cycle):
            if (v, u) in flow:
                flow.remove((v, u))
            else:
                flow.add((u, v))
        cancellations += 1

    if residual_has_negative_cycle(sep, flow):
        raise InvariantViolation("circulation optimality certificate failed")
    _check_conservation(sep.size, flow)
    cost = sum(int(sep.D[u, v]) for u, v in flow)
    if cost > 0 or (cost == 0 and flow):
        raise InvariantViolation(f"circulation cost {cost} is not negative")
    logger.info("circulation: cost %d over %d arcs after %d cancellations", cost, len(flow), cancellations)
    return CirculationResult(arcs=frozenset(flow), cost=cost, cancellations=cancellations)


def decompose_circulation(arcs: Iterable[Arc]) -> list[tuple[int, ...]]:
    """Split a 0,1-circulation of R' into its vertex-disjoint cycles."""
    succ = dict(arcs)
    walks = []
    seen: set[int] = set()
    for start in sorted(succ):
        if start in seen:
            continue
        walk = [start]
        seen.add(start)
        v = succ[start]
        while v != start:
            walk.append(v)
            seen.add(v)
            v = succ[v]
        walk.append(start)
        walks.append(tuple(walk))
    return walks
