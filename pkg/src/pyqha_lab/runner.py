"""Run one experiment at N and 2N and write its report files."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .basis_cache import cache_dir
from .errors import ValidationGateError
from .experiments import Experiment, ExperimentContext, ExperimentOutcome, get_experiment
from .hermite_rep import validate_ambiguity_closed_form
from .model_utils import build_params, params_to_dict
from .operator_io import curve_to_csv, spectrum_to_csv
from .parallel import set_default_workers
from .plotting import render_plot
from .serialization import SPECTRUM_HEADER, SPECTRUM_NAME, write_meta, write_report
from .state import ExperimentConfig, RunState

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_GATE = 2
EXIT_FAILED = 3

RATIO_NAME = "ratio.csv"
RATIO_HEADER = "p,block_ratio"


@dataclass
class RunResult:
    exit_code: int
    report: dict[str, Any] | None = None
    files: list[Path] = field(default_factory=list)
    state: RunState | None = None


def relative_delta(value: float | None, value_2n: float | None) -> float | None:
    """``|v(2N) - v(N)| / max(|v(N)|, |v(2N)|)``; ``None`` when either side is missing."""

    if value is None or value_2n is None:
        return None
    a, b = float(value), float(value_2n)
    if not (math.isfinite(a) and math.isfinite(b)):
        return None
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(b - a) / scale


def merge_results(
    first: ExperimentOutcome, second: ExperimentOutcome
) -> dict[str, dict[str, float | None]]:
    results = {}
    for key, value in first.metrics.items():
        value_2n = second.metrics.get(key)
        results[key] = {
            "value": value,
            "value_2N": value_2n,
            "rel_delta": relative_delta(value, value_2n),
        }
    return results


def stability_passes(
    experiment: Experiment, results: dict[str, dict[str, float | None]]
) -> dict[str, bool]:
    passes = {}
    for metric, tol in experiment.stable:
        delta = results.get(metric, {}).get("rel_delta")
        passes[f"{metric}_stable"] = delta is not None and delta <= tol
    return passes


def _run_gate(state: RunState) -> dict[str, Any]:
    state.log("validation gate: closed-form ambiguity vs quadrature")
    report = validate_ambiguity_closed_form(seed=state.config.seed)
    return {
        "max_error": report.max_error,
        "points": report.points,
        "size": report.size,
        "tolerance": report.tolerance,
    }


def _context(config: ExperimentConfig, size: int, state: RunState) -> ExperimentContext:
    return ExperimentContext(
        size=size,
        seed=config.seed,
        workers=config.workers,
        grid_L=config.grid.L,
        grid_M=config.grid.M,
        cache_dir=cache_dir(),
        log=state.log,
    )


def _write_outputs(
    outcome: ExperimentOutcome, experiment: Experiment, out_dir: Path
) -> list[Path]:
    files = []
    if outcome.spectrum is not None:
        csv_path = spectrum_to_csv(outcome.spectrum, out_dir / SPECTRUM_NAME, SPECTRUM_HEADER)
        files.append(csv_path)
        files.append(
            render_plot(csv_path, "loglog-spectrum", out_dir / "plot.svg", experiment.name)
        )
    if outcome.ratio_curve is not None:
        p, ratio = outcome.ratio_curve
        csv_path = curve_to_csv(p, ratio, out_dir / RATIO_NAME, RATIO_HEADER)
        files.append(csv_path)
        files.append(render_plot(csv_path, "ratio-curve", out_dir / "ratio.svg", experiment.name))
    return files


def build_report(
    experiment: Experiment,
    config: ExperimentConfig,
    params: Any,
    sizes: tuple[int, int],
    gate: dict[str, Any] | None,
    first: ExperimentOutcome,
    second: ExperimentOutcome,
) -> dict[str, Any]:
    results = merge_results(first, second)
    stable = stability_passes(experiment, results)
    effective = config.effective()
    effective["params"] = params_to_dict(params)
    passed = all(first.passes.values()) and all(second.passes.values()) and all(stable.values())
    return {
        "experiment": experiment.name,
        "anchor": experiment.anchor,
        "config": effective,
        "truncation": {"N": sizes[0], "N2": sizes[1], "meaning": experiment.size_meaning},
        "gate": gate,
        "results": results,
        "passes": first.passes,
        "passes_2N": second.passes,
        "stability": stable,
        "details": {"N": first.details, "2N": second.details},
        "passed": passed,
    }


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Run ``config.experiment`` at ``N`` and ``2N``.

    Raises :class:`ConfigError` for usage problems; a failed validation gate is
    reported through the exit code.
    """

    experiment = get_experiment(config.experiment)
    params = build_params(experiment.params_cls, config.params)
    if config.workers is not None:
        set_default_workers(config.workers)
    state = RunState(config)
    out_dir = Path(config.out_dir)
    n = config.N or experiment.default_size
    sizes = (n, 2 * n)
    logger.info("running %s at N=%d and 2N=%d", experiment.name, *sizes)

    try:
        gate = _run_gate(state) if experiment.needs_gate else None
        outcomes = []
        for size in sizes:
            state.log(f"{experiment.name}: N={size}")
            outcomes.append(experiment.run(params, _context(config, size, state)))
            state.stage_seconds[f"N={size}"] = state.elapsed - sum(state.stage_seconds.values())
    except ValidationGateError as exc:
        logger.error("validation gate failed: %s", exc)
        state.log(f"validation gate failed: {exc}")
        state.finish(EXIT_GATE)
        meta = write_meta(state, out_dir, {"error": str(exc)})
        return RunResult(EXIT_GATE, None, [meta], state)

    report = build_report(experiment, config, params, sizes, gate, *outcomes)
    files = [write_report(report, out_dir)]
    files.extend(_write_outputs(outcomes[0], experiment, out_dir))
    exit_code = EXIT_PASS if report["passed"] else EXIT_FAILED
    state.finish(exit_code)
    files.append(write_meta(state, out_dir))
    for path in files:
        logger.info("wrote %s", path)
    return RunResult(exit_code, report, files, state)
