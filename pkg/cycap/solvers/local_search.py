"""
cycap - Local Search Module
Directed 2-opt / 3-opt and their k*-opt variants.

A k-opt move removes k tour arcs and reconnects the segments. The k*-opt
variant also scores the whole-tour reversal of every reconnection and of the
current tour, which matters when c[i, j] != c[j, i]. Acceptance is
first-improvement: the scan restarts after every accepted move.

Reconnection order for 3-opt, with A the segment wrapping past position 0
and ' meaning reversed: A B' C, A B C', A B' C', A C B, A C B', A C' B,
A C' B'; then the reversals of those seven in the same order, then rev(T).
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from cycap.core.instance import Instance
from cycap.core.tour import Tour

logger = logging.getLogger(__name__)


class OptStep(Enum):
    TWO_OPT = 2
    THREE_OPT = 3


@dataclass(frozen=True)
class OptSchedule:
    steps: tuple[OptStep, ...]
    star: bool = True
    time_cap: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("schedule needs at least one step")

    @property
    def label(self) -> str:
        return "+".join(str(s.value) for s in self.steps)


@dataclass
class SearchStats:
    """Accepted moves per k and whether a time cap cut the search short."""

    moves: dict[int, int] = field(default_factory=dict)
    capped: bool = False

    def record(self, k: int, count: int) -> None:
        self.moves[k] = self.moves.get(k, 0) + count

    @property
    def total_moves(self) -> int:
        return sum(self.moves.values())


SCHEDULE_STEPS: dict[str, tuple[OptStep, ...]] = {
    "2": (OptStep.TWO_OPT,),
    "3": (OptStep.THREE_OPT,),
    "2+3": (OptStep.TWO_OPT, OptStep.THREE_OPT),
}


def parse_schedule(name: str, star: bool = True, time_cap: Optional[float] = None) -> OptSchedule:
    """Build a schedule from a preset name such as '2', '3' or '2+3'."""
    from cycap.core.presets import preset_loader

    steps = preset_loader.schedule(name) or SCHEDULE_STEPS.get(name)
    if not steps:
        raise ValueError(f"unknown schedule {name!r}")
    return OptSchedule(steps=tuple(steps), star=star, time_cap=time_cap)


class _Scan:
    """Prefix sums of forward and backward arc costs along a tour order."""

    def __init__(self, instance: Instance, tour: Tour) -> None:
        self.C = instance.cost
        self.t = np.array(tour.order(0), dtype=np.int64)
        self.n = len(self.t)
        nxt = np.roll(self.t, -1)
        self.fw = self.C[self.t, nxt]
        self.bw = self.C[nxt, self.t]
        self.Fp = np.concatenate(([0], np.cumsum(self.fw)))
        self.Bp = np.concatenate(([0], np.cumsum(self.bw)))
        self.ftot = int(self.Fp[-1])
        self.btot = int(self.Bp[-1])


def _two_opt_candidates(s: _Scan, star: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ii, jj = np.triu_indices(s.n, 1)
    C, t = s.C, s.t
    a1, a2, b1, c2 = t[ii], t[ii + 1], t[jj], t[(jj + 1) % s.n]
    FB = s.Fp[jj] - s.Fp[ii + 1]
    RB = s.Bp[jj] - s.Bp[ii + 1]
    FA = s.ftot - FB - s.fw[ii] - s.fw[jj]
    RA = s.btot - RB - s.bw[ii] - s.bw[jj]

    rows = [FA + RB + C[a1, b1] + C[a2, c2]]
    if star:
        rows.append(RA + FB + C[b1, a1] + C[c2, a2])
        rows.append(np.full_like(FA, s.btot))
    return np.vstack(rows), ii, jj


def _apply_two_opt(s: _Scan, i: int, j: int, choice: int) -> Tour:
    t = [int(v) for v in s.t]
    if choice == 2:
        return Tour.from_order(t[::-1])
    order = t[j + 1:] + t[:i + 1] + t[i + 1:j + 1][::-1]
    if choice == 1:
        order = order[::-1]
    return Tour.from_order(order)


# (segment, reversed) pairs for the seven 3-opt reconnections, B = 0, C = 1
_THREE_OPT_LAYOUTS = (
    ((0, True), (1, False)),
    ((0, False), (1, True)),
    ((0, True), (1, True)),
    ((1, False), (0, False)),
    ((1, False), (0, True)),
    ((1, True), (0, False)),
    ((1, True), (0, True)),
)


def _three_opt_candidates(s: _Scan, i: int, star: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = s.n - 1 - i
    aa, bb = np.triu_indices(m, 1)
    jj, kk = aa + i + 1, bb + i + 1
    C, t = s.C, s.t
    a1, a2 = t[i], t[i + 1]
    b1, b2, c1, c2 = t[jj], t[jj + 1], t[kk], t[(kk + 1) % s.n]

    FB = s.Fp[jj] - s.Fp[i + 1]
    RB = s.Bp[jj] - s.Bp[i + 1]
    FC = s.Fp[kk] - s.Fp[jj + 1]
    RC = s.Bp[kk] - s.Bp[jj + 1]
    FA = s.ftot - FB - FC - s.fw[i] - s.fw[jj] - s.fw[kk]
    RA = s.btot - RB - RC - s.bw[i] - s.bw[jj] - s.bw[kk]

    a2v = np.full_like(b1, a2)
    # (first, last, internal cost, internal cost once the whole tour is reversed)
    segments = {
        (0, False): (a2v, b1, FB, RB),
        (0, True): (b1, a2v, RB, FB),
        (1, False): (b2, c1, FC, RC),
        (1, True): (c1, b2, RC, FC),
    }

    rows, rev_rows = [], []
    for x_key, y_key in _THREE_OPT_LAYOUTS:
        xf, xl, xin, xrev = segments[x_key]
        yf, yl, yin, yrev = segments[y_key]
        rows.append(FA + xin + yin + C[a1, xf] + C[xl, yf] + C[yl, c2])
        if star:
            rev_rows.append(RA + xrev + yrev + C[xf, a1] + C[yf, xl] + C[c2, yl])
    if star:
        rows.extend(rev_rows)
        rows.append(np.full_like(FA, s.btot))
    return np.vstack(rows), jj, kk


def _apply_three_opt(s: _Scan, i: int, j: int, k: int, choice: int) -> Tour:
    t = [int(v) for v in s.t]
    if choice == 2 * len(_THREE_OPT_LAYOUTS):
        return Tour.from_order(t[::-1])
    layout = _THREE_OPT_LAYOUTS[choice % len(_THREE_OPT_LAYOUTS)]
    pieces = {0: t[i + 1:j + 1], 1: t[j + 1:k + 1]}
    order = t[k + 1:] + t[:i + 1]
    for seg, rev in layout:
        order += pieces[seg][::-1] if rev else pieces[seg]
    if choice >= len(_THREE_OPT_LAYOUTS):
        order = order[::-1]
    return Tour.from_order(order)


def _first_improving(cand: np.ndarray, current: int) -> Optional[tuple[int, int]]:
    improving = cand.min(axis=0) < current
    if not improving.any():
        return None
    pos = int(np.argmax(improving))
    return pos, int(np.argmin(cand[:, pos]))


def _improve_once(instance: Instance, tour: Tour, k: int, star: bool, deadline: Optional[float]) -> Optional[Tour]:
    """One first-improvement move, or None at a local optimum / expired deadline."""
    s = _Scan(instance, tour)
    if k == 2:
        cand, ii, jj = _two_opt_candidates(s, star)
        hit = _first_improving(cand, s.ftot)
        if hit is None:
            return None
        pos, choice = hit
        return _apply_two_opt(s, int(ii[pos]), int(jj[pos]), choice)

    for i in range(s.n - 2):
        if deadline is not None and time.monotonic() > deadline:
            return None
        cand, jj, kk = _three_opt_candidates(s, i, star)
        if cand.shape[1] == 0:
            continue
        hit = _first_improving(cand, s.ftot)
        if hit is not None:
            pos, choice = hit
            return _apply_three_opt(s, i, int(jj[pos]), int(kk[pos]), choice)
    return None


def _local_opt(
    instance: Instance,
    tour: Tour,
    k: int,
    star: bool,
    deadline: Optional[float],
    stats: Optional[SearchStats],
) -> tuple[Tour, int, bool]:
    current, moves, capped = tour, 0, False
    while True:
        if deadline is not None and time.monotonic() > deadline:
            capped = True
            break
        nxt = _improve_once(instance, current, k, star, deadline)
        if nxt is None:
            capped = deadline is not None and time.monotonic() > deadline
            break
        current = nxt
        moves += 1
    if stats is not None:
        stats.record(k, moves)
        stats.capped = stats.capped or capped
    logger.debug("%d-opt%s: %d moves%s", k, "*" if star else "", moves, " (capped)" if capped else "")
    return current, moves, capped


def k_opt_star(
    instance: Instance,
    tour: Tour,
    k: int,
    star: bool = True,
    time_cap: Optional[float] = None,
    stats: Optional[SearchStats] = None,
) -> Tour:
    """Run k-opt (k*-opt when `star`) to local optimality or until the time cap."""
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")
    deadline = time.monotonic() + time_cap if time_cap is not None else None
    result, _, _ = _local_opt(instance, tour, k, star, deadline, stats)
    return result


def run_schedule(
    instance: Instance,
    tour: Tour,
    schedule: OptSchedule,
    stats: Optional[SearchStats] = None,
) -> Tour:
    """Apply the schedule's steps in order, returning to the first step whenever a later one improves."""
    deadline = time.monotonic() + schedule.time_cap if schedule.time_cap is not None else None
    current = tour
    idx = 0
    while idx < len(schedule.steps):
        k = schedule.steps[idx].value
        current, moves, capped = _local_opt(instance, current, k, schedule.star, deadline, stats)
        if capped:
            break
        if moves and idx > 0:
            idx = 0
            continue
        idx += 1
    return current
