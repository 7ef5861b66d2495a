"""
cycap - Benchmark Harness Module
Seeded repeated runs, success rates, gap closure, timing medians and the
ten-times-median time-cap policy.
"""

import hashlib
import logging
import statistics
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from cycap.bench.oracle import held_karp
from cycap.config import Limits
from cycap.core.cache import CacheManager, cache as default_cache
from cycap.core.instance import Instance
from cycap.core.pipeline import PipelineConfig, RunResult, run_pipeline
from cycap.core.presets import preset_loader
from cycap.errors import NoGapError
from cycap.utils.log import err_console

logger = logging.getLogger(__name__)

CSV_FIELDS = [
    "seed", "initial_cost", "after_cycap_cost", "final_cost",
    "subtour_count_after_cancel", "isolated_count",
    "improved_after_cycap", "improved_final", "gap_closure", "capped",
    "time_pre", "time_cycap", "time_post", "time_total",
]


def gap_closure(T_o: int, T_f: int, T_opt: int) -> Fraction:
    """Share of the optimality gap closed: (T_o - T_f) / (T_o - T_opt)."""
    if T_o == T_opt:
        raise NoGapError(f"start cost {T_o} is already optimal")
    if T_o < T_opt:
        raise ValueError(f"start cost {T_o} is below the optimum {T_opt}")
    if T_f > T_o:
        raise ValueError(f"final cost {T_f} exceeds start cost {T_o}")
    return Fraction(T_o - T_f, T_o - T_opt)


def rational_to_dict(value: Optional[Fraction]) -> Optional[dict[str, Any]]:
    if value is None:
        return None
    return {
        "numerator": value.numerator,
        "denominator": value.denominator,
        "decimal": f"{float(value):.{Limits.GAP_DECIMALS}f}",
    }


def rational_from_dict(data: Optional[dict[str, Any]]) -> Optional[Fraction]:
    if data is None:
        return None
    return Fraction(int(data["numerator"]), int(data["denominator"]))


def apply_time_cap_policy(variant_median: Optional[float], enabled: bool = True) -> Optional[float]:
    """Ten times the median Cycap running time, floored at the clock resolution."""
    if not enabled or variant_median is None:
        return None
    resolution = time.get_clock_info("monotonic").resolution
    return Limits.TIME_CAP_FACTOR * max(variant_median, resolution)


def instance_fingerprint(instance: Instance) -> str:
    return hashlib.sha256(instance.cost.tobytes()).hexdigest()[:16]


def calibrate_time_cap(
    instance: Instance,
    config: PipelineConfig,
    runs: int = Limits.CALIBRATION_RUNS,
    cache: Optional[CacheManager] = None,
) -> Optional[float]:
    """Measure the median Cycap phase time over `runs` uncapped runs and apply the policy."""
    cache = cache or default_cache
    runs = max(runs, Limits.CALIBRATION_RUNS)
    post = config.post_schedule.label if config.post_schedule else "none"
    key = f"timecap:{instance_fingerprint(instance)}:{config.variant.value}:{config.pre_schedule.label}:{post}:{runs}"

    median = cache.get(key)
    if median is None:
        samples = [
            run_pipeline(instance, config.uncapped().with_seed(config.seed + i)).timings["cycap"]
            for i in range(runs)
        ]
        median = statistics.median(samples)
        cache.set(key, median)
        logger.info("calibrated cycap median %.4fs over %d runs", median, runs)
    else:
        logger.info("cached cycap median %.4fs", median)
    return apply_time_cap_policy(float(median))


@dataclass
class Report:
    instance: str
    variant: str
    schedule: str
    trials: int
    base_seed: int
    t_opt: int
    t_opt_source: str
    success_rate_cycap: Fraction
    success_rate_final: Fraction
    gap_closure_mean: Optional[Fraction]
    timings: dict[str, float]
    histogram_subtours: dict[int, int]
    histogram_isolated: dict[int, int]
    per_trial: list[dict[str, Any]] = field(default_factory=list)
    time_cap: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance": self.instance,
            "variant": self.variant,
            "schedule": self.schedule,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "t_opt": self.t_opt,
            "t_opt_source": self.t_opt_source,
            "time_cap": self.time_cap,
            "success_rate_cycap": rational_to_dict(self.success_rate_cycap),
            "success_rate_final": rational_to_dict(self.success_rate_final),
            "gap_closure_mean": rational_to_dict(self.gap_closure_mean),
            "timings": dict(self.timings),
            "histogram_subtours": {str(k): v for k, v in sorted(self.histogram_subtours.items())},
            "histogram_isolated": {str(k): v for k, v in sorted(self.histogram_isolated.items())},
            "per_trial": [
                {**row, "gap_closure": rational_to_dict(row["gap_closure"])}
                for row in self.per_trial
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Report":
        return cls(
            instance=data["instance"],
            variant=data["variant"],
            schedule=data["schedule"],
            trials=int(data["trials"]),
            base_seed=int(data["base_seed"]),
            t_opt=int(data["t_opt"]),
            t_opt_source=data["t_opt_source"],
            time_cap=data.get("time_cap"),
            success_rate_cycap=rational_from_dict(data["success_rate_cycap"]),
            success_rate_final=rational_from_dict(data["success_rate_final"]),
            gap_closure_mean=rational_from_dict(data.get("gap_closure_mean")),
            timings=dict(data["timings"]),
            histogram_subtours={int(k): int(v) for k, v in data["histogram_subtours"].items()},
            histogram_isolated={int(k): int(v) for k, v in data["histogram_isolated"].items()},
            per_trial=[
                {**row, "gap_closure": rational_from_dict(row.get("gap_closure"))}
                for row in data["per_trial"]
            ],
        )

    def csv_rows(self) -> list[dict[str, Any]]:
        """One flat row per trial, in seed order."""
        rows = []
        for row in self.per_trial:
            gc = row["gap_closure"]
            flat = {key: row.get(key) for key in CSV_FIELDS if not key.startswith("time_")}
            flat["gap_closure"] = f"{float(gc):.{Limits.GAP_DECIMALS}f}" if gc is not None else ""
            for phase in ("pre", "cycap", "post", "total"):
                flat[f"time_{phase}"] = f"{row['timings'][phase]:.6f}"
            rows.append(flat)
        return rows


def _trial_row(run: RunResult, t_opt: int) -> dict[str, Any]:
    gc = None
    if run.improved_final and run.initial_cost > t_opt:
        gc = gap_closure(run.initial_cost, run.final_cost, t_opt)
    return {
        "seed": run.seed,
        "initial_cost": run.initial_cost,
        "after_cycap_cost": run.after_cycap_cost,
        "final_cost": run.final_cost,
        "subtour_count_after_cancel": run.subtour_count_after_cancel,
        "isolated_count": run.isolated_count,
        "improved_after_cycap": run.improved_after_cycap,
        "improved_final": run.improved_final,
        "gap_closure": gc,
        "capped": run.capped,
        "timings": dict(run.timings),
        "final_tour": run.final_tour.to_external() if run.final_tour else None,
    }


def _resolve_t_opt(instance: Instance, runs: list[RunResult], opt: Optional[int]) -> tuple[int, str]:
    if instance.n <= Limits.HELD_KARP_MAX_N:
        cost, _ = held_karp(instance)
        return cost, "held_karp"
    if opt is not None:
        return opt, "user"
    known = preset_loader.best_known(instance.name)
    if known is not None:
        return known, "best_known"
    return min(run.final_cost for run in runs), "best_observed"


def run_trials(
    instance: Instance,
    config: PipelineConfig,
    seeds: list[int],
    jobs: int = 1,
    show_progress: bool = True,
) -> list[RunResult]:
    """Run one pipeline per seed, in parallel when jobs > 1; results sorted by seed."""
    results: dict[int, RunResult] = {}
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=err_console,
        transient=True,
        disable=not show_progress,
    ) as progress:
        task = progress.add_task(f"{instance.name} {config.label}", total=len(seeds))
        if jobs <= 1:
            for seed in seeds:
                results[seed] = run_pipeline(instance, config.with_seed(seed))
                progress.update(task, advance=1)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as executor:
                future_to_seed = {
                    executor.submit(run_pipeline, instance, config.with_seed(seed)): seed
                    for seed in seeds
                }
                for future in as_completed(future_to_seed):
                    results[future_to_seed[future]] = future.result()
                    progress.update(task, advance=1)
    return [results[seed] for seed in sorted(results)]


def experiment(
    instance: Instance,
    config: PipelineConfig,
    trials: int,
    base_seed: int,
    opt: Optional[int] = None,
    jobs: int = 1,
    time_cap_policy: bool = False,
    show_progress: bool = True,
) -> Report:
    """Run `trials` seeded pipelines and reduce them into a Report."""
    if trials < 1:
        raise ValueError(f"trials must be ≥ 1, got {trials}")

    time_cap = config.time_cap
    if time_cap_policy and not instance.symmetric:
        time_cap = calibrate_time_cap(instance, config.with_seed(base_seed))
        config = config.with_time_cap(time_cap)
        logger.info("time cap %.4fs from policy", time_cap)

    runs = run_trials(instance, config, list(range(base_seed, base_seed + trials)), jobs, show_progress)
    t_opt, source = _resolve_t_opt(instance, runs, opt)
    rows = [_trial_row(run, t_opt) for run in runs]

    closures = [row["gap_closure"] for row in rows if row["gap_closure"] is not None]
    gap_mean = sum(closures, Fraction(0)) / len(closures) if closures else None

    report = Report(
        instance=instance.name,
        variant=config.variant.value,
        schedule=config.label,
        trials=trials,
        base_seed=base_seed,
        t_opt=t_opt,
        t_opt_source=source,
        time_cap=time_cap,
        success_rate_cycap=Fraction(sum(r.improved_after_cycap for r in runs), trials),
        success_rate_final=Fraction(sum(r.improved_final for r in runs), trials),
        gap_closure_mean=gap_mean,
        timings={
            "median_cycap": statistics.median(r.timings["cycap"] for r in runs),
            "median_total": statistics.median(r.timings["total"] for r in runs),
        },
        histogram_subtours=dict(Counter(r.subtour_count_after_cancel for r in runs)),
        histogram_isolated=dict(Counter(r.isolated_count for r in runs)),
        per_trial=rows,
    )
    logger.info(
        "%s %s: success %.2f%%, gap closure %s",
        instance.name, config.label, 100 * float(report.success_rate_final),
        rational_to_dict(gap_mean)["decimal"] if gap_mean is not None else "n/a",
    )
    return report
