"""
cycap - Pipeline Module
Random start, k-opt, one cycle cancel and patch pass, optional second k-opt.

A run never returns a tour worse than its k-opt starting tour: every variant
keeps the input tour as a candidate.
"""

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Optional

import numpy as np

from cycap.core.cancel_patch import cancel, patch_all
from cycap.core.instance import Instance
from cycap.core.residual import AlternatingStructure, build_separated, map_back, structure_from_arcs
from cycap.core.tour import Tour, decompose, random_tour, tour_cost, validate_tour
from cycap.errors import InvariantViolation
from cycap.solvers.detect import floyd_warshall_full, karp_min_mean, min_cost_circulation, predecessor_readout
from cycap.solvers.local_search import OptSchedule, SearchStats, run_schedule

logger = logging.getLogger(__name__)


class Variant(Enum):
    F = "f"
    M = "m"
    C = "c"

    @classmethod
    def parse(cls, value: str) -> "Variant":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown variant {value!r}, expected one of f, m, c") from None


@dataclass(frozen=True)
class PipelineConfig:
    variant: Variant
    pre_schedule: OptSchedule
    post_schedule: Optional[OptSchedule] = None
    seed: int = 0
    time_cap: Optional[float] = None
    iterate: bool = False
    include_reverse_tour_insertions: bool = False

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, seed=seed)

    def with_time_cap(self, time_cap: Optional[float]) -> "PipelineConfig":
        return replace(self, time_cap=time_cap)

    def uncapped(self) -> "PipelineConfig":
        """Drop the run cap and every cap carried by the schedules themselves."""
        post = replace(self.post_schedule, time_cap=None) if self.post_schedule else None
        return replace(
            self,
            time_cap=None,
            pre_schedule=replace(self.pre_schedule, time_cap=None),
            post_schedule=post,
        )

    @property
    def label(self) -> str:
        post = f"+{self.post_schedule.label}" if self.post_schedule else ""
        return f"{self.pre_schedule.label}+{self.variant.value.upper()}{post}"

    def capped(self, schedule: OptSchedule) -> OptSchedule:
        if self.time_cap is None:
            return schedule
        return replace(schedule, time_cap=self.time_cap)


@dataclass
class CycapStats:
    """What one cycap_once call looked at and what it chose."""

    candidates: int = 0
    detector_cost: Optional[int] = None
    subtours: int = 0
    isolated: int = 0
    improved: bool = False
    passes: int = 1


@dataclass
class RunResult:
    seed: int
    variant: str
    initial_cost: int
    after_cycap_cost: int
    final_cost: int
    subtour_count_after_cancel: int
    isolated_count: int
    timings: dict[str, float]
    improved_after_cycap: bool
    improved_final: bool
    capped: bool = False
    moves: dict[int, int] = field(default_factory=dict)
    initial_tour: Optional[Tour] = None
    final_tour: Optional[Tour] = None

    def to_dict(self) -> dict[str, Any]:
        """Flat, JSON-ready view; tours as 1-based vertex lists."""
        data = asdict(self)
        data["initial_tour"] = self.initial_tour.to_external() if self.initial_tour else None
        data["final_tour"] = self.final_tour.to_external() if self.final_tour else None
        data["moves"] = {str(k): v for k, v in sorted(self.moves.items())}
        return data


def _cancel_and_patch(
    instance: Instance,
    tour: Tour,
    structure: AlternatingStructure,
    rng: np.random.Generator,
) -> tuple[Tour, int, int, int]:
    flow = cancel(instance, tour, structure)
    parts = decompose(flow)
    patched = patch_all(instance, flow, rng)
    return patched, tour_cost(instance, patched), len(parts.subtours), len(parts.isolated)


def cycap_once(
    instance: Instance,
    tour: Tour,
    variant: Variant,
    rng: np.random.Generator,
    include_reverse_tour_insertions: bool = False,
) -> tuple[Tour, CycapStats]:
    """One detect, cancel and patch pass; returns the cheapest of the results and the input."""
    sep = build_separated(instance, tour, include_reverse_tour_insertions)
    stats = CycapStats()

    structures: list[AlternatingStructure] = []
    if variant is Variant.F:
        Dstar, Pstar = floyd_warshall_full(sep)
        candidates = predecessor_readout(Dstar, Pstar, sep)
        structures = [map_back(sep, c.walk) for c in candidates]
        if candidates:
            stats.detector_cost = min(c.cost for c in candidates)
    elif variant is Variant.M:
        candidate = karp_min_mean(sep)
        if candidate is not None:
            structures = [map_back(sep, candidate.walk)]
            stats.detector_cost = candidate.cost
    else:
        circulation = min_cost_circulation(sep)
        if not circulation.empty:
            structures = [structure_from_arcs(sep, circulation.arcs)]
            stats.detector_cost = circulation.cost
    stats.candidates = len(structures)

    best_tour, best_cost = tour, tour_cost(instance, tour)
    attempted_cost: Optional[int] = None
    for structure in structures:
        patched, cost, subtours, isolated = _cancel_and_patch(instance, tour, structure, rng)
        if attempted_cost is None or cost < attempted_cost:
            attempted_cost = cost
            stats.subtours, stats.isolated = subtours, isolated
        if cost < best_cost:
            best_tour, best_cost = patched, cost

    stats.improved = best_tour is not tour
    logger.info(
        "cycap-%s: %d candidates, best cost %d (%s)",
        variant.value.upper(), stats.candidates, best_cost, "improved" if stats.improved else "kept input",
    )
    return best_tour, stats


def _check(instance: Instance, tour: Tour, phase: str) -> None:
    if not validate_tour(tour, instance.n):
        raise InvariantViolation(f"{phase} produced an invalid tour")


def run_pipeline(instance: Instance, config: PipelineConfig) -> RunResult:
    """Full seeded run: random tour, pre schedule, cycap, optional post schedule."""
    rng = np.random.default_rng(config.seed)
    search = SearchStats()
    timings: dict[str, float] = {}
    started = time.monotonic()

    start = random_tour(instance.n, rng)
    initial = run_schedule(instance, start, config.capped(config.pre_schedule), search)
    _check(instance, initial, "pre schedule")
    initial_cost = tour_cost(instance, initial)
    timings["pre"] = time.monotonic() - started

    mark = time.monotonic()
    current, stats = cycap_once(instance, initial, config.variant, rng, config.include_reverse_tour_insertions)
    first = stats
    while config.iterate and stats.improved:
        current, stats = cycap_once(instance, current, config.variant, rng, config.include_reverse_tour_insertions)
        first.passes += 1
    _check(instance, current, "cycap")
    after_cost = tour_cost(instance, current)
    timings["cycap"] = time.monotonic() - mark

    mark = time.monotonic()
    final = current
    if config.post_schedule is not None:
        final = run_schedule(instance, current, config.capped(config.post_schedule), search)
        _check(instance, final, "post schedule")
    final_cost = tour_cost(instance, final)
    timings["post"] = time.monotonic() - mark
    timings["total"] = time.monotonic() - started

    if final_cost > initial_cost:
        raise InvariantViolation(f"final cost {final_cost} exceeds initial cost {initial_cost}")

    logger.info("seed %d: %d -> %d -> %d", config.seed, initial_cost, after_cost, final_cost)
    return RunResult(
        seed=config.seed,
        variant=config.variant.value,
        initial_cost=initial_cost,
        after_cycap_cost=after_cost,
        final_cost=final_cost,
        subtour_count_after_cancel=first.subtours,
        isolated_count=first.isolated,
        timings=timings,
        improved_after_cycap=after_cost < initial_cost,
        improved_final=final_cost < initial_cost,
        capped=search.capped,
        moves=dict(search.moves),
        initial_tour=initial,
        final_tour=final,
    )
