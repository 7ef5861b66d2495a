"""
cycap - Built-in Fixtures
Worked examples available by name (`fig3`, `fig5`) without instance files.
"""

from typing import Callable

import numpy as np

from cycap.core.instance import Instance, build_instance, figure3_instance
from cycap.core.residual import AlternatingStructure, StructureKind
from cycap.core.tour import Tour


def figure3_tour() -> Tour:
    """Tour 1 -> 2 -> ... -> 10 -> 1, locally optimal for 2-opt and 3-opt (cost 70)."""
    return Tour.from_external(list(range(1, 11)))


def figure3_improved_tour() -> Tour:
    return Tour.from_external([1, 6, 7, 2, 3, 8, 9, 4, 5, 10])


def figure5_tour() -> Tour:
    return Tour.from_external(list(range(1, 9)))


def figure5_structure() -> AlternatingStructure:
    """Two alternating cycles sharing the opposite insertion pair (3,7)/(7,3)."""
    def arcs(*pairs: tuple[int, int]) -> frozenset[tuple[int, int]]:
        return frozenset((i - 1, j - 1) for i, j in pairs)

    return AlternatingStructure(
        removals=arcs((2, 3), (7, 8), (3, 4), (6, 7)),
        insertions=arcs((2, 8), (7, 3), (3, 7), (6, 4)),
        kind=StructureKind.CIRCULATION,
    )


def figure5_instance() -> Instance:
    """Eight vertices: tour arcs cost 10, the four circulation insertions cost 3, rest 20."""
    n = 8
    matrix = np.full((n, n), 20, dtype=np.int64)
    for i in range(n):
        matrix[i, (i + 1) % n] = 10
    for h, k in figure5_structure().insertions:
        matrix[h, k] = 3
    return build_instance("fig5", matrix)


FIXTURES: dict[str, Callable[[], Instance]] = {
    "fig3": figure3_instance,
    "fig5": figure5_instance,
}
