"""
cycap - Exact Oracle Module
Held-Karp subset dynamic programming for small directed instances, and the
optimum-versus-pipeline comparison behind the `oracle` command.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from cycap.config import Limits
from cycap.core.instance import Instance
from cycap.core.pipeline import PipelineConfig, Variant, run_pipeline
from cycap.core.tour import Tour
from cycap.errors import OracleSizeError

logger = logging.getLogger(__name__)

_INF = 2 ** 61


def held_karp(instance: Instance) -> tuple[int, Tour]:
    """Optimal directed tour by bitmask DP with vertex 0 fixed as the start."""
    n = instance.n
    if not Limits.MIN_VERTICES <= n <= Limits.HELD_KARP_MAX_N:
        raise OracleSizeError(
            f"exact oracle supports {Limits.MIN_VERTICES} ≤ n ≤ {Limits.HELD_KARP_MAX_N}, got n = {n}"
        )

    # bit j of a mask stands for vertex j + 1
    m = n - 1
    C = instance.cost[1:, 1:]
    full = (1 << m) - 1
    dp = np.full((1 << m, m), _INF, dtype=np.int64)
    parent = np.full((1 << m, m), -1, dtype=np.int8)
    for j in range(m):
        dp[1 << j, j] = instance.cost[0, j + 1]

    masks = np.arange(1 << m)
    popcount = np.array([bin(x).count("1") for x in range(1 << m)])
    for size in range(2, m + 1):
        layer = masks[popcount == size]
        for j in range(m):
            sel = layer[(layer >> j) & 1 == 1]
            if sel.size == 0:
                continue
            prev = sel ^ (1 << j)
            cand = dp[prev] + C[:, j][None, :]
            best = cand.argmin(axis=1)
            dp[sel, j] = np.minimum(cand[np.arange(sel.size), best], _INF)
            parent[sel, j] = best

    closing = dp[full] + instance.cost[1:, 0]
    last = int(np.argmin(closing))
    cost = int(closing[last])

    order = []
    mask, j = full, last
    while j >= 0:
        order.append(j + 1)
        prev_j = int(parent[mask, j])
        mask ^= 1 << j
        j = prev_j
    order.append(0)
    order.reverse()
    logger.info("held-karp: n=%d optimum %d", n, cost)
    return cost, Tour.from_order(order)


@dataclass
class OracleComparison:
    instance: str
    optimal_cost: int
    optimal_tour: Tour
    rows: list[dict] = field(default_factory=list)

    @property
    def dominated(self) -> bool:
        """True when no pipeline run beat the optimum."""
        return all(row["final_cost"] >= self.optimal_cost for row in self.rows)


def compare_with_oracle(instance: Instance, template: PipelineConfig, seeds: int) -> OracleComparison:
    """Held-Karp optimum next to every variant's pipeline result over `seeds` seeds."""
    optimal_cost, optimal_tour = held_karp(instance)
    result = OracleComparison(instance=instance.name, optimal_cost=optimal_cost, optimal_tour=optimal_tour)
    for variant in Variant:
        for offset in range(seeds):
            config = PipelineConfig(
                variant=variant,
                pre_schedule=template.pre_schedule,
                post_schedule=template.post_schedule,
                seed=template.seed + offset,
                iterate=template.iterate,
                include_reverse_tour_insertions=template.include_reverse_tour_insertions,
            )
            run = run_pipeline(instance, config)
            result.rows.append({
                "variant": variant.value,
                "seed": run.seed,
                "initial_cost": run.initial_cost,
                "final_cost": run.final_cost,
                "gap": run.final_cost - optimal_cost,
            })
    return result
