"""``qha`` command-line entry point.

    qha list
    qha plot <csv> --kind loglog-spectrum|ratio-curve [--out file.svg]
    qha <experiment> [--config path] [--seed k] [--N n] [--out dir] [--workers w]
                     [--key=value ...]

Exit codes:
    0  every pass flag is true
    1  usage error
    2  validation gate failed (closed form disagrees with its quadrature oracle)
    3  the experiment ran but at least one pass flag is false
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from rich.logging import RichHandler

from .config_io import build_experiment_config
from .errors import ConfigError, MeasureSpecError, PlotError
from .experiments import list_experiments
from .messages import (
    console,
    err_console,
    experiments_table,
    passes_table,
    results_table,
    show_error,
    show_exception,
    show_warning,
)
from .plotting import PLOT_KINDS, render_plot
from .runner import EXIT_FAILED, EXIT_PASS, EXIT_USAGE, run_experiment

LOGGER_NAME = "pyqha_lab"


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors share one exit path."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logger = logging.getLogger(LOGGER_NAME)
    logger.handlers = [RichHandler(console=err_console, show_path=False, rich_tracebacks=True)]
    logger.setLevel(level)
    logger.propagate = False


def _plot_parser() -> UsageParser:
    parser = UsageParser(
        prog="qha plot",
        description="Render a report CSV as a deterministic SVG",
        allow_abbrev=False,
    )
    parser.add_argument("csv", type=Path)
    parser.add_argument("--kind", choices=PLOT_KINDS, default="loglog-spectrum")
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--title", default=None)
    return parser


def _run_parser(name: str) -> UsageParser:
    parser = UsageParser(
        prog=f"qha {name}",
        description="Run an experiment at N and 2N; extra --key=value pairs set parameters",
        allow_abbrev=False,
    )
    parser.add_argument("--config", type=Path, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--N", dest="N", type=int, default=None)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--quiet", action="store_true")
    return parser


def cmd_list() -> int:
    console.print(experiments_table(list_experiments()))
    console.print("\n[dim]Run one with:[/dim] [bold green]qha <experiment>[/bold green]")
    return EXIT_PASS


def cmd_plot(argv: list[str]) -> int:
    args = _plot_parser().parse_args(argv)
    out = args.out or args.csv.with_suffix(".svg")
    target = render_plot(args.csv, args.kind, out, args.title)
    console.print(f"[dim]Wrote {target}[/dim]")
    return EXIT_PASS


def cmd_run(name: str, argv: list[str]) -> int:
    args, extra = _run_parser(name).parse_known_args(argv)
    configure_logging(args.verbose, args.quiet)
    stray = [item for item in extra if not (item.startswith("--") and "=" in item)]
    if stray:
        raise ConfigError(f"Unexpected arguments {' '.join(stray)}; parameters use --key=value")
    config = build_experiment_config(
        name,
        args.config,
        flags={"seed": args.seed, "N": args.N, "out_dir": args.out, "workers": args.workers},
        overrides=extra,
    )
    result = run_experiment(config)
    if result.report is None:
        show_error("Validation gate", "A closed-form fast path disagreed with its oracle.")
        return result.exit_code
    if not args.quiet:
        console.print(results_table(result.report))
        console.print(passes_table(result.report))
        console.print(f"[dim]Report written to {config.out_dir}[/dim]")
    if result.exit_code == EXIT_FAILED:
        failed = sorted(
            name for name, ok in result.report["passes"].items() if ok is False
        )
        show_warning("Checks failed", ", ".join(failed) or "a check at 2N failed")
    return result.exit_code


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    configure_logging()
    if not args or args[0] in ("-h", "--help"):
        console.print(__doc__, markup=False, highlight=False)
        return EXIT_PASS if args else EXIT_USAGE
    command, rest = args[0], args[1:]
    try:
        if command == "list":
            return cmd_list()
        if command == "plot":
            return cmd_plot(rest)
        return cmd_run(command, rest)
    except ConfigError as exc:
        show_error("Usage error", str(exc))
        if str(exc).startswith("Unknown experiment"):
            err_console.print(experiments_table(list_experiments()))
        return EXIT_USAGE
    except (PlotError, MeasureSpecError) as exc:
        show_error("Input error", str(exc))
        return EXIT_USAGE
    except Exception as exc:
        show_exception("Unexpected error", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
