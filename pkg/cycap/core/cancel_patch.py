"""
cycap - Cancel and Patch Module
Unit-flow cancel of an alternating structure, opposite-pair trimming, and
greedy patching of the resulting subtours back into one tour.
"""

import logging

import numpy as np

from cycap.core.instance import Instance
from cycap.core.residual import AlternatingStructure
from cycap.core.tour import FlowState, Tour, decompose, tour_from_flow, validate_tour
from cycap.errors import InvariantViolation, StructureError

logger = logging.getLogger(__name__)

Arc = tuple[int, int]


def opposite_insertion_pairs(s: AlternatingStructure) -> list[Arc]:
    """Insertion pairs {(u, v), (v, u)}, reported once as (u, v) with u < v."""
    return sorted((u, v) for u, v in s.insertions if u < v and (v, u) in s.insertions)


def cancel(instance: Instance, tour: Tour, s: AlternatingStructure) -> FlowState:
    """Apply the structure to the tour as a unit-flow update, then trim opposite insertions."""
    n = instance.n
    for i, j in s.removals:
        if not (0 <= i < n and tour.succ[i] == j):
            raise StructureError(f"removal ({i + 1}, {j + 1}) is not a tour arc")
    for h, k in s.insertions:
        if not (0 <= h < n and 0 <= k < n) or h == k:
            raise StructureError(f"insertion ({h + 1}, {k + 1}) is not an arc of the instance")
        if tour.succ[h] == k:
            raise StructureError(f"insertion ({h + 1}, {k + 1}) is already a tour arc")

    arcs = (set(tour.arcs()) - s.removals) | s.insertions
    trimmed = opposite_insertion_pairs(s)
    for u, v in trimmed:
        arcs.discard((u, v))
        arcs.discard((v, u))

    succ: dict[int, int] = {}
    indeg = [0] * n
    for u, v in sorted(arcs):
        if u in succ:
            raise InvariantViolation(f"vertex {u + 1} has out-degree > 1 after cancel")
        succ[u] = v
        indeg[v] += 1
    for v in range(n):
        if indeg[v] != (1 if v in succ else 0):
            raise InvariantViolation(f"vertex {v + 1} is unbalanced after cancel")

    isolated = frozenset(v for v in range(n) if v not in succ)
    logger.debug(
        "cancel: removed=%d inserted=%d trimmed=%d isolated=%d",
        len(s.removals), len(s.insertions), len(trimmed), len(isolated),
    )
    return FlowState(succ=succ, isolated=isolated)


def _subtour_arcs(flow: FlowState, subtour: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    for v in subtour:
        if v not in flow.succ:
            raise StructureError(f"vertex {v + 1} is not on a subtour")
    tails = np.array(subtour, dtype=np.int64)
    heads = np.array([flow.succ[v] for v in subtour], dtype=np.int64)
    if sorted(heads.tolist()) != sorted(subtour):
        raise StructureError("vertex sequence is not a subtour of the flow")
    return tails, heads


def patch_pair(
    instance: Instance,
    flow: FlowState,
    s1: tuple[int, ...],
    s2: tuple[int, ...],
) -> FlowState:
    """Merge two subtours with the minimum-delta two-arc exchange."""
    if set(s1) == set(s2):
        raise StructureError("patch_pair needs two distinct subtours")
    I, J = _subtour_arcs(flow, s1)
    H, K = _subtour_arcs(flow, s2)
    if set(s1) & set(s2):
        raise StructureError("subtours overlap")

    C = instance.cost
    delta = (
        C[I[:, None], K[None, :]]
        + C[H[None, :], J[:, None]]
        - C[I, J][:, None]
        - C[H, K][None, :]
    )
    a, b = np.unravel_index(int(np.argmin(delta)), delta.shape)
    i, j, h, k = int(I[a]), int(J[a]), int(H[b]), int(K[b])

    succ = dict(flow.succ)
    succ[i] = k
    succ[h] = j
    logger.debug("patch pair: (%d,%d) x (%d,%d) delta=%d", i + 1, j + 1, h + 1, k + 1, int(delta[a, b]))
    return FlowState(succ=succ, isolated=flow.isolated)


def patch_isolated(instance: Instance, flow: FlowState, v: int) -> FlowState:
    """Insert an isolated vertex into its cheapest arc over all current subtours."""
    if v not in flow.isolated:
        raise StructureError(f"vertex {v + 1} is not isolated")
    subtours = decompose(flow).subtours
    if not subtours:
        raise StructureError("no subtour to absorb an isolated vertex")

    H = np.array([u for sub in subtours for u in sub], dtype=np.int64)
    K = np.array([flow.succ[u] for u in H.tolist()], dtype=np.int64)
    C = instance.cost
    delta = C[H, v] + C[v, K] - C[H, K]
    best = int(np.argmin(delta))
    h, k = int(H[best]), int(K[best])

    succ = dict(flow.succ)
    succ[h] = v
    succ[v] = k
    logger.debug("patch isolated: %d into (%d,%d) delta=%d", v + 1, h + 1, k + 1, int(delta[best]))
    return FlowState(succ=succ, isolated=flow.isolated - {v})


def patch_all(instance: Instance, flow: FlowState, rng: np.random.Generator) -> Tour:
    """Absorb isolated vertices in ascending order, then merge random subtour pairs."""
    if not flow.succ:
        # every vertex isolated: seed a 2-cycle from the two smallest
        u, v = sorted(flow.isolated)[:2]
        flow = FlowState(succ={u: v, v: u}, isolated=flow.isolated - {u, v})

    for v in sorted(flow.isolated):
        flow = patch_isolated(instance, flow, v)

    subtours = decompose(flow).subtours
    while len(subtours) >= 2:
        a, b = rng.choice(len(subtours), size=2, replace=False)
        flow = patch_pair(instance, flow, subtours[int(a)], subtours[int(b)])
        subtours = decompose(flow).subtours

    tour = tour_from_flow(flow)
    if not validate_tour(tour, instance.n):
        raise InvariantViolation("patching did not produce a Hamiltonian tour")
    return tour
