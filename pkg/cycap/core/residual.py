"""
cycap - Residual Module
Tour graph R = (G, T) and its separated bipartite encoding R'.

In R' vertices 0..n-1 form side A (originals) and n..2n-1 side B
(duplicates, v' = n + v). Insertion arcs (h, k) of R become A->B arcs
(h, n+k) with cost c[h, k]; every tour arc (i, pi(i)) becomes the removal arc
(n+pi(i), i) with cost -c[i, pi(i)].
"""

import io
import csv
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from cycap.core.instance import Instance
from cycap.core.tour import Tour
from cycap.errors import StructureError

logger = logging.getLogger(__name__)

ABSENT_PRED = -1

Arc = tuple[int, int]


class StructureKind(Enum):
    CYCLE = "cycle"
    CIRCULATION = "circulation"


@dataclass(frozen=True, eq=False)
class SeparatedGraph:
    n: int
    D: np.ndarray
    P: np.ndarray
    tour: Tour
    sentinel: int

    @property
    def size(self) -> int:
        return 2 * self.n

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.D[u, v] < self.sentinel)

    def present(self) -> np.ndarray:
        """Boolean adjacency matrix of R'."""
        return self.D < self.sentinel

    def removal_arcs(self) -> list[Arc]:
        return [(self.n + j, i) for i, j in enumerate(self.tour.succ)]


@dataclass(frozen=True)
class AlternatingStructure:
    """Removal tour arcs and insertion arcs of a tour-alternating cycle or circulation."""

    removals: frozenset[Arc]
    insertions: frozenset[Arc]
    kind: StructureKind = StructureKind.CYCLE

    def __post_init__(self) -> None:
        if len(self.removals) != len(self.insertions) or len(self.removals) < 2:
            raise StructureError(
                f"need |removals| = |insertions| >= 2, got {len(self.removals)} and {len(self.insertions)}"
            )
        if _endpoint_counts(self.removals) != _endpoint_counts(self.insertions):
            raise StructureError("unbalanced structure: removal and insertion endpoints differ")
        if self.removals & self.insertions:
            raise StructureError("an arc cannot be both removed and inserted")


def _endpoint_counts(arcs: Iterable[Arc]) -> tuple[dict[int, int], dict[int, int]]:
    tails: dict[int, int] = {}
    heads: dict[int, int] = {}
    for u, v in arcs:
        tails[u] = tails.get(u, 0) + 1
        heads[v] = heads.get(v, 0) + 1
    return tails, heads


def build_separated(
    instance: Instance,
    tour: Tour,
    include_reverse_tour_insertions: bool = False,
) -> SeparatedGraph:
    """Build the 2n x 2n cost and predecessor matrices of R'.

    Arcs (j, i) whose reverse is a tour arc are not insertions unless
    `include_reverse_tour_insertions` is set.
    Zero-cost arcs are allowed. They only yield zero-value cycles, which no
    detector reports, so nothing is canceled for them.
    """
    n = instance.n
    sentinel = 2 * n * instance.penalty
    D = np.full((2 * n, 2 * n), sentinel, dtype=np.int64)
    P = np.full((2 * n, 2 * n), ABSENT_PRED, dtype=np.int64)

    succ = np.fromiter(tour.succ, dtype=np.int64, count=n)
    rows = np.arange(n)

    # insertion arcs h -> k'
    allowed = ~np.eye(n, dtype=bool)
    allowed[rows, succ] = False
    if not include_reverse_tour_insertions:
        allowed[succ, rows] = False
    h_idx, k_idx = np.nonzero(allowed)
    D[h_idx, n + k_idx] = instance.cost[h_idx, k_idx]
    P[h_idx, n + k_idx] = h_idx

    # removal arcs pi(i)' -> i
    D[n + succ, rows] = -instance.cost[rows, succ]
    P[n + succ, rows] = n + succ

    D.setflags(write=False)
    P.setflags(write=False)
    logger.debug("separated graph: n=%d insertions=%d removals=%d", n, len(h_idx), n)
    return SeparatedGraph(n=n, D=D, P=P, tour=tour, sentinel=sentinel)


def _walk_arcs(walk: Sequence[int]) -> list[Arc]:
    return [(int(walk[t]), int(walk[t + 1])) for t in range(len(walk) - 1)]


def walk_cost(sep: SeparatedGraph, walk: Sequence[int]) -> int:
    """Exact D-sum along a closed walk given as v0, v1, ..., v0."""
    total = 0
    for u, v in _walk_arcs(walk):
        if not sep.has_arc(u, v):
            raise StructureError(f"walk uses absent arc ({u}, {v})")
        total += int(sep.D[u, v])
    return total


def _arc_to_residual(sep: SeparatedGraph, u: int, v: int) -> tuple[str, Arc]:
    n = sep.n
    if not sep.has_arc(u, v):
        raise StructureError(f"walk uses absent arc ({u}, {v})")
    if u < n <= v:
        return "insert", (u, v - n)
    # B -> A: removal of tour arc (v, pi(v)) where pi(v) = u - n
    return "remove", (v, u - n)


def map_back(sep: SeparatedGraph, walk: Sequence[int]) -> AlternatingStructure:
    """Translate a closed walk in R' into the alternating cycle it encodes in R."""
    if len(walk) < 2 or walk[0] != walk[-1]:
        raise StructureError("walk is not closed")
    body = list(walk[:-1])
    if len(set(body)) != len(body):
        raise StructureError("walk repeats a vertex of the separated graph")

    removals: set[Arc] = set()
    insertions: set[Arc] = set()
    for u, v in _walk_arcs(walk):
        role, arc = _arc_to_residual(sep, u, v)
        (insertions if role == "insert" else removals).add(arc)
    return AlternatingStructure(frozenset(removals), frozenset(insertions), StructureKind.CYCLE)


def structure_from_arcs(sep: SeparatedGraph, arcs: Iterable[Arc]) -> AlternatingStructure:
    """Translate an arc set of R' (e.g. a circulation) into one structure in R."""
    removals: set[Arc] = set()
    insertions: set[Arc] = set()
    arc_list = list(arcs)
    for u, v in arc_list:
        role, arc = _arc_to_residual(sep, u, v)
        (insertions if role == "insert" else removals).add(arc)

    # each R' vertex carries at most one outgoing circulation arc
    succ = dict(arc_list)
    components, seen = 0, set()
    for start in succ:
        if start in seen:
            continue
        components += 1
        v = start
        while v not in seen:
            seen.add(v)
            v = succ[v]
    kind = StructureKind.CIRCULATION if components > 1 else StructureKind.CYCLE
    return AlternatingStructure(frozenset(removals), frozenset(insertions), kind)


def structure_cost(instance: Instance, s: AlternatingStructure) -> int:
    inserted = sum(instance.c(h, k) for h, k in s.insertions)
    removed = sum(instance.c(i, j) for i, j in s.removals)
    return inserted - removed


def dump_separated_csv(sep: SeparatedGraph) -> str:
    """D and P of R' as CSV blocks; absent entries are left empty."""
    labels = [f"v{i + 1}" for i in range(sep.n)] + [f"v{i + 1}'" for i in range(sep.n)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for title, matrix in (("D", sep.D), ("P", sep.P)):
        writer.writerow([title] + labels)
        for r, label in enumerate(labels):
            row = []
            for c in range(sep.size):
                if not sep.has_arc(r, c):
                    row.append("")
                elif title == "D":
                    row.append(str(int(matrix[r, c])))
                else:
                    row.append(labels[int(matrix[r, c])])
            writer.writerow([label] + row)
    return buf.getvalue()
