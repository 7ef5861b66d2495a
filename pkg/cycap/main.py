"""
cycap - Cycle Cancel and Patch
Main entry point and CLI interface.

Sub-commands:
    solve    one seeded pipeline run
    bench    repeated seeded runs written as a JSON or CSV report
    oracle   Held-Karp optimum next to every variant's results (n ≤ 16)
    convert  write an instance as a CSV cost matrix
"""

import argparse
import json
import sys
from typing import Callable, Optional

from rich.console import Console
from rich.table import Table
from rich import box

from cycap import __version__
from cycap.config import DEFAULT_SEED, DEFAULT_TRIALS, LOG_LEVEL, MAX_JOBS
from cycap.bench.harness import Report, experiment
from cycap.bench.oracle import compare_with_oracle
from cycap.core.cache import cache
from cycap.core.instance import Instance, load_instance, to_matrix_csv
from cycap.core.pipeline import PipelineConfig, RunResult, Variant, run_pipeline
from cycap.core.residual import build_separated, dump_separated_csv
from cycap.core.tour import format_tour
from cycap.errors import CycapError, InvariantViolation
from cycap.solvers.local_search import parse_schedule
from cycap.utils.export import report_csv, report_json, save_report_csv, save_report_json
from cycap.utils.log import err_console, setup_logging

console = Console()

SCHEDULE_CHOICES = ["2", "3", "2+3"]

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2


def _star(value: str, instance: Instance) -> bool:
    if value == "auto":
        return not instance.symmetric
    return value == "true"


def build_config(args: argparse.Namespace, instance: Instance) -> PipelineConfig:
    """Pipeline configuration from the shared solve/bench/oracle flags."""
    star = _star(args.star, instance)
    time_cap = getattr(args, "time_cap", None)
    if time_cap is not None and time_cap <= 0:
        raise ValueError(f"--time-cap must be positive, got {time_cap}")
    post = None if args.post == "none" else parse_schedule(args.post, star, time_cap)
    return PipelineConfig(
        variant=Variant.parse(getattr(args, "variant", "c")),
        pre_schedule=parse_schedule(args.pre, star, time_cap),
        post_schedule=post,
        seed=args.seed,
        time_cap=time_cap,
        iterate=args.iterate,
        include_reverse_tour_insertions=args.include_reverse,
    )


def _print_run(instance: Instance, config: PipelineConfig, result: RunResult) -> None:
    table = Table(title=f"{instance.name} (n={instance.n}) {config.label} seed {result.seed}", box=box.SIMPLE)
    table.add_column("Phase", style="cyan")
    table.add_column("Cost", justify="right")
    table.add_column("Time (s)", justify="right")
    table.add_row("k-opt", str(result.initial_cost), f"{result.timings['pre']:.3f}")
    table.add_row("cycap", str(result.after_cycap_cost), f"{result.timings['cycap']:.3f}")
    table.add_row("final", str(result.final_cost), f"{result.timings['post']:.3f}")
    console.print(table)
    console.print(
        f"subtours {result.subtour_count_after_cancel}, isolated {result.isolated_count}, "
        f"improved {'yes' if result.improved_final else 'no'}"
        + (" (time cap reached)" if result.capped else ""),
        highlight=False,
    )
    if result.final_tour is not None:
        console.print(f"tour: {format_tour(result.final_tour)}", highlight=False)


def cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    config = build_config(args, instance)
    result = run_pipeline(instance, config)

    if args.dump_separated:
        sep = build_separated(instance, result.initial_tour, config.include_reverse_tour_insertions)
        with open(args.dump_separated, "w", encoding="utf-8") as f:
            f.write(dump_separated_csv(sep))
        err_console.print(f"[green]✅ separated graph saved:[/green] {args.dump_separated}")

    if args.output == "json":
        data = {"instance": instance.name, "n": instance.n, "schedule": config.label, **result.to_dict()}
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        _print_run(instance, config, result)
    return EXIT_OK


def _print_report(report: Report) -> None:
    table = Table(title=f"{report.instance} {report.schedule}", box=box.SIMPLE)
    table.add_column("Measure", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("trials", str(report.trials))
    table.add_row(f"T_opt ({report.t_opt_source})", str(report.t_opt))
    table.add_row("success after cycap", f"{100 * float(report.success_rate_cycap):.2f}%")
    table.add_row("success final", f"{100 * float(report.success_rate_final):.2f}%")
    gap = report.gap_closure_mean
    table.add_row("gap closure", f"{100 * float(gap):.2f}%" if gap is not None else "n/a")
    table.add_row("median cycap (s)", f"{report.timings['median_cycap']:.4f}")
    table.add_row("median total (s)", f"{report.timings['median_total']:.4f}")
    console.print(table)


def cmd_bench(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ValueError(f"--trials must be ≥ 1, got {args.trials}")
    if args.jobs < 1:
        raise ValueError(f"--jobs must be ≥ 1, got {args.jobs}")
    jobs = min(args.jobs, MAX_JOBS)

    instance = load_instance(args.instance)
    config = build_config(args, instance)
    report = experiment(
        instance,
        config,
        trials=args.trials,
        base_seed=args.seed,
        opt=args.opt,
        jobs=jobs,
        time_cap_policy=args.time_cap_policy,
        show_progress=not args.quiet,
    )

    if args.report == "-":
        sys.stdout.write(report_csv(report) if args.format == "csv" else report_json(report))
        return EXIT_OK
    if args.format == "csv":
        save_report_csv(report, args.report)
    else:
        save_report_json(report, args.report)
    _print_report(report)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.seeds < 1:
        raise ValueError(f"--seeds must be ≥ 1, got {args.seeds}")
    instance = load_instance(args.instance)
    args.variant = "c"
    template = build_config(args, instance)
    comparison = compare_with_oracle(instance, template, args.seeds)

    console.print(f"optimal {comparison.optimal_cost}", highlight=False)
    console.print(f"tour: {format_tour(comparison.optimal_tour)}", highlight=False)
    table = Table(box=box.SIMPLE)
    for column in ("variant", "seed", "k-opt", "final", "gap"):
        table.add_column(column, justify="right")
    for row in comparison.rows:
        table.add_row(
            row["variant"].upper(), str(row["seed"]), str(row["initial_cost"]),
            str(row["final_cost"]), str(row["gap"]),
        )
    console.print(table)
    if not comparison.dominated:
        raise InvariantViolation("a pipeline tour is cheaper than the exact optimum")
    return EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    with open(args.output, "w", encoding="utf-8") as f:
        f.write(to_matrix_csv(instance))
    err_console.print(f"[green]✅ matrix saved:[/green] {args.output}")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser, variant: bool = True) -> None:
    p.add_argument('--instance', required=True, help='TSPLIB/CSV file or fixture name (fig3, fig5)')
    if variant:
        p.add_argument('--variant', type=str.lower, choices=['f', 'm', 'c'], default='c',
                       help='Detector: f = Floyd-Warshall readout, m = Karp min-mean, c = circulation')
    p.add_argument('--pre', choices=SCHEDULE_CHOICES, default='2', help='k-opt schedule before cycap')
    p.add_argument('--post', choices=['none'] + SCHEDULE_CHOICES, default='none', help='k-opt schedule after cycap')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Seed (base seed for bench)')
    p.add_argument('--star', type=str.lower, choices=['auto', 'true', 'false'], default='auto',
                   help='Use k*-opt candidates (auto: only on directed instances)')
    p.add_argument('--iterate', action='store_true', help='Repeat cycap until it stops improving')
    p.add_argument('--include-reverse', action='store_true',
                   help='Allow insertion arcs that reverse tour arcs')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycap",
        description="cycap - cycle cancel and patch for the directed TSP",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f"cycap {__version__}")
    parser.add_argument('--clear-cache', action='store_true', help='Clear cached time-cap calibrations')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('solve', help='Run the pipeline once')
    _add_run_flags(p)
    p.add_argument('--time-cap', type=float, help='Wall-clock cap in seconds for each k-opt schedule')
    p.add_argument('--output', choices=['text', 'json'], default='text', help='Output format')
    p.add_argument('--dump-separated', metavar='PATH', help='Write the separated graph of the k-opt tour as CSV')
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser('bench', help='Repeated seeded runs with a report')
    _add_run_flags(p)
    p.add_argument('--time-cap', type=float, help='Wall-clock cap in seconds for each k-opt schedule')
    p.add_argument('--trials', type=int, default=DEFAULT_TRIALS, help='Number of seeded trials')
    p.add_argument('--opt', type=int, help='Known optimum used for gap closure')
    p.add_argument('--report', metavar='PATH', help="Report path ('-' for standard output)")
    p.add_argument('--format', choices=['json', 'csv'], default='json', help='Report format')
    p.add_argument('--jobs', type=int, default=1, help=f'Parallel trials (max {MAX_JOBS})')
    p.add_argument('--time-cap-policy', action='store_true',
                   help='Cap directed k-opt runs at ten times the median cycap time')
    p.add_argument('--quiet', '-q', action='store_true', help='Hide the progress bar')
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser('oracle', help='Compare with the Held-Karp optimum (n ≤ 16)')
    _add_run_flags(p, variant=False)
    p.add_argument('--seeds', type=int, default=5, help='Seeds per variant')
    p.set_defaults(handler=cmd_oracle, pre='2+3')

    p = sub.add_parser('convert', help='Write an instance as a CSV matrix')
    p.add_argument('--instance', required=True, help='TSPLIB/CSV file or fixture name')
    p.add_argument('--output', required=True, help='CSV output path')
    p.set_defaults(handler=cmd_convert)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point with CLI argument parsing."""
    setup_logging(LOG_LEVEL)
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.clear_cache:
        removed = cache.clear()
        err_console.print(f"[green]✅ Cache cleared![/green] ({removed} entries)")
        if args.command is None:
            return EXIT_OK

    handler: Optional[Callable[[argparse.Namespace], int]] = getattr(args, "handler", None)
    if handler is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        return handler(args)
    except InvariantViolation as e:
        err_console.print(f"internal error: {e}", markup=False, highlight=False)
        return EXIT_INVARIANT
    except (CycapError, OSError, ValueError) as e:
        err_console.print(f"error: {e}", markup=False, highlight=False)
        return EXIT_USAGE
    except KeyboardInterrupt:
        err_console.print("interrupted", markup=False)
        return 130


if __name__ == "__main__":
    sys.exit(main())
