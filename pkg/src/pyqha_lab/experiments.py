"""Registry of named, reproducible experiments.

Each experiment declares a frozen parameter dataclass (introspected by
:mod:`pyqha_lab.model_utils`) and a run function that evaluates one truncation size.
The runner calls it at ``N`` and ``2N`` and compares the two.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .basis_cache import load_or_build
from .errors import ConfigError, MeasureSpecError, ValidationGateError
from .hermite_rep import HermiteBasis, ambiguity_on_grid, inner, line_grid_for
from .measure_io import load_measure, measure_summary
from .operator_calculus import (
    OperatorMatrix,
    conv_fun_op,
    fourier_wigner,
    grid_conv_op_op,
    integrate_rho,
    rank_one,
    schatten_norm,
    singular_spectrum,
    tau_quantize,
    weyl_quantize,
    weyl_quantize_many,
)
from .phase_space import (
    DIMENSION,
    DiscreteMeasure,
    PhaseFunction,
    PhaseGrid,
    atom_list,
    build_measure,
    cantor,
    circle,
    dirac,
    grid_lp_norm,
    nonuniform_symplectic_fourier,
    regularity_estimates,
    reweight_constant,
)
from .restriction_lab import (
    adjoint_duality_check,
    bak_exponent_bound,
    bak_ratio_sampler,
    circle_spectrum,
    compactness_probe,
    extension_bound_check,
    relative_sup_error,
    schatten_threshold_report,
    spectrum_threshold,
    tau_extension,
    transfer_check,
    transfer_checks,
    weyl_extension_gap,
)

logger = logging.getLogger(__name__)

MEASURE_SUFFIXES = (".json", ".yaml", ".yml", ".csv")


def _param(default: Any, help: str) -> Any:
    return field(default=default, metadata={"help": help})


@dataclass(frozen=True)
class ExperimentContext:
    size: int
    seed: int = 0
    workers: int | None = None
    grid_L: float | None = None
    grid_M: int | None = None
    cache_dir: Path | None = None
    log: Callable[[str], None] = logger.info

    def basis(self) -> HermiteBasis:
        return load_or_build(self.size, line_grid_for(self.size), self.cache_dir)

    def phase_grid(self, half_width: float, points: int) -> PhaseGrid:
        return PhaseGrid(self.grid_L or half_width, self.grid_M or points)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


@dataclass
class ExperimentOutcome:
    metrics: dict[str, float | None]
    passes: dict[str, bool]
    details: dict[str, Any] = field(default_factory=dict)
    spectrum: np.ndarray | None = None
    ratio_curve: tuple[np.ndarray, np.ndarray] | None = None


RunFn = Callable[[Any, ExperimentContext], ExperimentOutcome]


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    anchor: str
    params_cls: type[Any]
    run: RunFn
    default_size: int
    size_meaning: str = "Hermite truncation N"
    needs_gate: bool = True
    stable: tuple[tuple[str, float], ...] = ()


def resolve_measure(
    value: str | dict[str, Any],
    circle_nodes: int = 256,
    cantor_level: int = 2,
    cantor_contraction: float = 1.0 / 3.0,
) -> DiscreteMeasure:
    """Measure from a description mapping, a file path or a short name."""

    if isinstance(value, dict):
        spec = dict(value)
        if spec.get("kind") == "circle":
            spec.setdefault("radius", 1.0)
            spec.setdefault("nodes", circle_nodes)
        if spec.get("kind") == "cantor":
            spec.setdefault("level", cantor_level)
            spec.setdefault("contraction", cantor_contraction)
        return build_measure(spec)
    if not isinstance(value, str):
        raise MeasureSpecError(f"measure must be a name, a path or a mapping, got {value!r}")
    path = Path(value)
    if path.suffix.lower() in MEASURE_SUFFIXES:
        return load_measure(path)
    name = value.strip().lower()
    if name == "dirac":
        return dirac()
    if name == "circle":
        return circle(1.0, circle_nodes)
    if name == "cantor":
        return cantor(cantor_level, cantor_contraction)
    if name == "two-atom":
        return atom_list([(-0.25, 0.0), (0.25, 0.0)], [0.5, 0.5])
    raise MeasureSpecError(
        f"Unknown measure {value!r}; use dirac, circle, cantor, two-atom, a file or a mapping"
    )


def _gaussian(grid: PhaseGrid, width: float = 1.0) -> PhaseFunction:
    return PhaseFunction.from_callable(
        grid, lambda x, xi: np.exp(-np.pi * (x**2 + xi**2) / width**2)
    )


def _random_bumps(
    grid: PhaseGrid, rng: np.random.Generator, bumps: int, widths: tuple[float, float]
) -> PhaseFunction:
    """Sum of complex Gaussian bumps centered in the unit disk."""

    x, xi = grid.mesh()
    values = np.zeros_like(x, dtype=complex)
    for _ in range(bumps):
        r, theta = math.sqrt(rng.uniform()), 2.0 * math.pi * rng.uniform()
        cx, cxi = r * math.cos(theta), r * math.sin(theta)
        width = rng.uniform(*widths)
        amp = complex(rng.standard_normal(), rng.standard_normal())
        values += amp * np.exp(-np.pi * ((x - cx) ** 2 + (xi - cxi) ** 2) / width**2)
    return PhaseFunction(grid, values)


def _random_low_rank(
    n: int, modes: int, rank: int, rng: np.random.Generator, fingerprint: str
) -> OperatorMatrix:
    if modes > n:
        raise ConfigError(f"modes={modes} exceeds the truncation N={n}")
    u = rng.standard_normal((modes, rank)) + 1j * rng.standard_normal((modes, rank))
    v = rng.standard_normal((modes, rank)) + 1j * rng.standard_normal((modes, rank))
    entries = np.zeros((n, n), dtype=complex)
    entries[:modes, :modes] = u @ np.conj(v.T)
    return OperatorMatrix(entries, fingerprint)


def _unit_matrix(n: int, i: int, j: int, fingerprint: str) -> OperatorMatrix:
    entries = np.zeros((n, n), dtype=complex)
    entries[i, j] = 1.0
    return OperatorMatrix(entries, fingerprint)


def _disk_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(size=count))
    theta = 2.0 * np.pi * rng.uniform(size=count)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def _relative(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


# sphere-schatten


@dataclass(frozen=True)
class SphereSchattenParams:
    radius: float = _param(1.0, "circle radius r")
    mass: float = _param(1.0, "total mass of the circle measure")
    fit_lo: int = _param(1000, "first index of the decay fit")
    fit_hi: int = _param(100_000, "last index of the decay fit")
    p_min: float = _param(2.0, "smallest Schatten exponent on the sweep")
    p_max: float = _param(8.0, "largest Schatten exponent on the sweep")
    p_steps: int = _param(25, "number of exponents on the sweep")
    rule: str = _param("dyadic", "p* rule: dyadic or tail-crossing")
    level: float = _param(0.05, "tail-ratio level of the tail-crossing rule")
    decay_target: float = _param(-0.25, "expected decay exponent")
    decay_tol: float = _param(0.03, "tolerance on the decay exponent")
    p_tol: float = _param(0.1, "tolerance on p* around 4d/(2d-1)")


def run_sphere_schatten(params: SphereSchattenParams, ctx: ExperimentContext) -> ExperimentOutcome:
    spectrum = circle_spectrum(params.radius, ctx.size, params.mass)
    if spectrum.method != "closed-form":
        raise ValidationGateError(
            f"circle spectrum closed form failed validation (error {spectrum.validation_error:.3g})"
        )
    n = ctx.size
    lo = min(params.fit_lo, max(1, n // 64))
    fit = (lo, max(lo + 2, min(params.fit_hi, n)))
    p_grid = np.linspace(params.p_min, params.p_max, params.p_steps)
    report = schatten_threshold_report(spectrum.values, p_grid, params.rule, params.level, fit)
    expected_p = 4.0 * DIMENSION / (2.0 * DIMENSION - 1.0)
    ctx.log(f"decay {report.decay_exponent:.4f}, p* {report.p_star}")
    return ExperimentOutcome(
        metrics={
            "decay_exponent": report.decay_exponent,
            "p_star": report.p_star,
            "p_star_dyadic": report.p_star_dyadic,
            "p_star_tail": report.p_star_tail,
            "closed_form_error": spectrum.validation_error,
        },
        passes={
            "decay_exponent": abs(report.decay_exponent - params.decay_target) <= params.decay_tol,
            "p_star": report.p_star is not None
            and abs(report.p_star - expected_p) <= params.p_tol,
        },
        details={
            "expected_p": expected_p,
            "rule": report.rule,
            "level": report.level,
            "fit_range": list(report.fit_range),
            "flags": list(report.flags),
            "method": spectrum.method,
            "p_grid": list(report.p_grid),
            "tail_ratios": list(report.tail_ratios),
            "block_ratios": list(report.block_ratios),
        },
        spectrum=spectrum.values,
        ratio_curve=(np.asarray(report.p_grid), np.asarray(report.block_ratios)),
    )


# transfer


@dataclass(frozen=True)
class TransferParams:
    measures: tuple[str, ...] = _param(("circle", "two-atom", "cantor"), "measures to test")
    circle_nodes: int = _param(64, "quadrature nodes of the circle measure")
    cantor_level: int = _param(2, "level of the Cantor measure")
    modes: int = _param(4, "rank-one T = h_i (x) h_j for i, j below this")
    function_check: bool = _param(True, "also check the function-to-operator direction")
    duality_trials: int = _param(1000, "random adjunction instances, split over measures")
    identity_tol: float = _param(1e-6, "tolerance of the pointwise identity")
    duality_tol: float = _param(1e-10, "tolerance of the adjunction gap")


def run_transfer(params: TransferParams, ctx: ExperimentContext) -> ExperimentOutcome:
    basis = ctx.basis()
    n = basis.size
    grid = ctx.phase_grid(6.0, 64)
    ops = [
        _unit_matrix(n, i, j, basis.fingerprint)
        for i in range(params.modes)
        for j in range(params.modes)
    ]
    rng = ctx.rng(1)
    per_measure = max(1, -(-params.duality_trials // max(1, len(params.measures))))
    identity, floor_margin, function_error, duality_gap = 0.0, math.inf, 0.0, 0.0
    floors_ok = True
    per: dict[str, Any] = {}
    for name in params.measures:
        mu = resolve_measure(name, params.circle_nodes, params.cantor_level)
        reports = transfer_checks(ops, mu, basis, grid, ctx.workers)
        err = max(r.identity_error for r in reports)
        margin = min(r.window_floor - r.theoretical_floor for r in reports)
        entry: dict[str, Any] = {
            "atoms": mu.size,
            "identity_error": err,
            "floor_margin": margin,
            "constant_ratio": reports[0].constant_ratio,
        }
        if params.function_check:
            report = transfer_check("function", _gaussian(grid), mu, basis, grid, ctx.workers)
            entry["function_error"] = report.identity_error
            function_error = max(function_error, report.identity_error)
        gaps = []
        for _ in range(per_measure):
            values = rng.standard_normal(mu.size) + 1j * rng.standard_normal(mu.size)
            t = OperatorMatrix(
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), basis.fingerprint
            )
            lhs, rhs = adjoint_duality_check(values, t, mu, basis, ctx.workers)
            gaps.append(_relative(lhs, rhs))
        entry["duality_gap"] = max(gaps)
        per[name] = entry
        identity = max(identity, err)
        floor_margin = min(floor_margin, margin)
        floors_ok = floors_ok and all(r.floor_ok for r in reports)
        duality_gap = max(duality_gap, entry["duality_gap"])
        ctx.log(f"transfer on {name}: identity {err:.3g}, floor margin {margin:.3g}")

    passes = {
        "identity": identity < params.identity_tol,
        "window_floor": floors_ok,
        "duality": duality_gap < params.duality_tol,
    }
    metrics: dict[str, float | None] = {
        "identity_error": identity,
        "floor_margin": floor_margin,
        "duality_gap": duality_gap,
    }
    if params.function_check:
        passes["function_identity"] = function_error < params.identity_tol
        metrics["function_error"] = function_error
    return ExperimentOutcome(
        metrics, passes, {"measures": per, "operators": len(ops), "grid": list(grid.key)}
    )


# werner-young

YOUNG_TRIPLES = ((1.0, 1.0, 1.0), (1.0, 2.0, 2.0), (2.0, 2.0, math.inf))


@dataclass(frozen=True)
class WernerYoungParams:
    trials: int = _param(1000, "randomized trials")
    modes: int = _param(4, "operators live on the leading modes")
    rank: int = _param(2, "rank of the random operators")
    bumps: int = _param(2, "Gaussian bumps per random function")
    slack: float = _param(1e-6, "relative slack before a trial counts as a violation")


def _triple_key(form: str, triple: tuple[float, float, float]) -> str:
    return f"{form}_" + "_".join("inf" if math.isinf(v) else str(int(v)) for v in triple)


def run_werner_young(params: WernerYoungParams, ctx: ExperimentContext) -> ExperimentOutcome:
    basis = ctx.basis()
    n = basis.size
    grid = ctx.phase_grid(5.0, 64)
    rng = ctx.rng(2)
    worst: dict[str, float] = {}
    violations = 0
    for _ in range(params.trials):
        f = _random_bumps(grid, rng, params.bumps, (0.5, 1.0))
        s = _random_low_rank(n, params.modes, params.rank, rng, basis.fingerprint)
        t = _random_low_rank(n, params.modes, params.rank, rng, basis.fingerprint)
        ft = conv_fun_op(f, t, ctx.workers)
        st = grid_conv_op_op(s, t, grid, ctx.workers)
        for p, q, r in YOUNG_TRIPLES:
            checks = (
                ("fun_op", schatten_norm(ft, r), grid_lp_norm(f, p) * schatten_norm(t, q)),
                ("op_op", grid_lp_norm(st, r), schatten_norm(s, p) * schatten_norm(t, q)),
            )
            for form, lhs, rhs in checks:
                key = _triple_key(form, (p, q, r))
                ratio = lhs / rhs if rhs > 0 else 0.0
                worst[key] = max(worst.get(key, 0.0), ratio)
                if lhs > rhs * (1.0 + params.slack):
                    violations += 1
    ctx.log(f"werner-young: {violations} violations over {params.trials} trials")
    metrics: dict[str, float | None] = {f"max_ratio_{k}": v for k, v in sorted(worst.items())}
    metrics["violations"] = float(violations)
    return ExperimentOutcome(
        metrics, {"no_violations": violations == 0}, {"trials": params.trials}
    )


# convolution-theorem


@dataclass(frozen=True)
class ConvolutionTheoremParams:
    targets: int = _param(64, "random evaluation points")
    target_radius: float = _param(1.5, "evaluation points lie in this disk")
    random_trials: int = _param(100, "random low-rank operators")
    modes: int = _param(4, "random operators live on the leading modes")
    rank: int = _param(2, "rank of the random operators")
    gaussian_tol: float = _param(1e-6, "tolerance for Gaussian F and rank-one Gaussian S")
    random_tol: float = _param(1e-3, "tolerance for random low-rank S")


def run_convolution_theorem(
    params: ConvolutionTheoremParams, ctx: ExperimentContext
) -> ExperimentOutcome:
    basis = ctx.basis()
    grid = ctx.phase_grid(6.0, 64)
    rng = ctx.rng(3)
    targets = _disk_points(rng, params.targets, params.target_radius)
    f = _gaussian(grid)
    f_hat = nonuniform_symplectic_fourier(f, targets, ctx.workers)

    def fun_op_error(s: OperatorMatrix) -> float:
        lhs = fourier_wigner(conv_fun_op(f, s, ctx.workers), targets, basis, ctx.workers)
        return relative_sup_error(lhs, f_hat * fourier_wigner(s, targets, basis, ctx.workers))

    def op_op_error(s: OperatorMatrix, t: OperatorMatrix) -> float:
        lhs = nonuniform_symplectic_fourier(grid_conv_op_op(s, t, grid, ctx.workers), targets)
        rhs = fourier_wigner(s, targets, basis) * fourier_wigner(t, targets, basis)
        return relative_sup_error(lhs, rhs)

    g0 = basis.wave(0)
    gauss_op = rank_one(g0, g0, basis)
    gaussian_error = fun_op_error(gauss_op)
    gaussian_werner = op_op_error(gauss_op, gauss_op)
    random_error, random_werner = 0.0, 0.0
    for _ in range(params.random_trials):
        s = _random_low_rank(basis.size, params.modes, params.rank, rng, basis.fingerprint)
        t = _random_low_rank(basis.size, params.modes, params.rank, rng, basis.fingerprint)
        random_error = max(random_error, fun_op_error(s))
        random_werner = max(random_werner, op_op_error(s, t))
    ctx.log(f"convolution theorem: gaussian {gaussian_error:.3g}, random {random_error:.3g}")
    return ExperimentOutcome(
        metrics={
            "gaussian_error": gaussian_error,
            "gaussian_werner_error": gaussian_werner,
            "random_max_error": random_error,
            "random_werner_max_error": random_werner,
        },
        passes={
            "gaussian": gaussian_error < params.gaussian_tol,
            "gaussian_werner": gaussian_werner < params.gaussian_tol,
            "random": random_error < params.random_tol,
            "random_werner": random_werner < params.random_tol,
        },
        details={"targets": params.targets, "grid": list(grid.key)},
    )


# pool-isometry


@dataclass(frozen=True)
class PoolIsometryParams:
    symbols: int = _param(20, "random Gaussian-enveloped symbols")
    bumps: int = _param(3, "Gaussian bumps per symbol")
    isometry_tol: float = _param(1e-3, "relative tolerance of ||L_a||_S2 = ||a||_L2")
    moyal_modes: int = _param(4, "Hermite functions h_0.. used in the orthogonality check")
    moyal_tol: float = _param(1e-6, "tolerance of the orthogonality relations")
    inversion_tol: float = _param(1e-4, "relative L2 tolerance of the inversion formula")


def run_pool_isometry(params: PoolIsometryParams, ctx: ExperimentContext) -> ExperimentOutcome:
    basis = ctx.basis()
    grid = ctx.phase_grid(6.0, 256)
    rng = ctx.rng(4)
    symbols = [_random_bumps(grid, rng, params.bumps, (0.6, 1.2)) for _ in range(params.symbols)]
    ops = weyl_quantize_many(symbols, basis, ctx.workers)
    isometry = max(abs(op.hs_norm() - a.l2_norm()) / a.l2_norm() for op, a in zip(ops, symbols))

    k = params.moyal_modes
    waves = [basis.wave(i) for i in range(k)]
    moyal_grid = ctx.phase_grid(6.0, 64)
    inversion_grid = ctx.phase_grid(6.0, 128)
    stack = np.stack(
        [
            ambiguity_on_grid(waves[i], waves[j], moyal_grid, ctx.workers).values.ravel()
            for i in range(k)
            for j in range(k)
        ]
    )
    gram = moyal_grid.cell_area * (stack @ np.conj(stack.T))
    moyal = float(np.abs(gram - np.eye(k * k)).max())

    amb = ambiguity_on_grid(waves[1], waves[0], inversion_grid, ctx.workers)
    synthesis = integrate_rho(amb, basis, ctx.workers)
    unit = np.zeros(basis.size, dtype=complex)
    unit[0] = 1.0
    target = np.zeros(basis.size, dtype=complex)
    target[1] = 1.0
    recon = synthesis.apply(unit) / inner(waves[0], waves[0])
    inversion = float(np.linalg.norm(recon - target) / np.linalg.norm(target))
    ctx.log(f"isometry {isometry:.3g}, moyal {moyal:.3g}, inversion {inversion:.3g}")
    return ExperimentOutcome(
        metrics={
            "isometry_max_error": isometry,
            "moyal_max_error": moyal,
            "inversion_error": inversion,
        },
        passes={
            "isometry": isometry < params.isometry_tol,
            "moyal": moyal < params.moyal_tol,
            "inversion": inversion < params.inversion_tol,
        },
        details={
            "symbols": params.symbols,
            "grid": list(grid.key),
            "moyal_grid": list(moyal_grid.key),
            "inversion_grid": list(inversion_grid.key),
            "flagged_symbols": sum(1 for op in ops if op.flags),
        },
    )


# weyl-extension


@dataclass(frozen=True)
class WeylExtensionParams:
    measure: str | dict = _param("circle", "measure name, file or mapping")
    circle_nodes: int = _param(512, "quadrature nodes of the circle measure")
    L_values: tuple[float, ...] = _param((4.0, 6.0, 8.0), "phase-grid half-widths to sweep")
    points_per_unit: int = _param(16, "grid points per unit length (M = points_per_unit * L)")
    compare_modes: int | None = _param(None, "leading block compared (default N/4)")
    gap_tol: float = _param(0.05, "relative HS gap required at the largest L")


def run_weyl_extension(params: WeylExtensionParams, ctx: ExperimentContext) -> ExperimentOutcome:
    basis = ctx.basis()
    mu = resolve_measure(params.measure, params.circle_nodes)
    gaps = []
    for half_width in params.L_values:
        points = 2 * math.ceil(params.points_per_unit * half_width / 2)
        grid = PhaseGrid(half_width, points)
        gap = weyl_extension_gap(mu, basis, grid, params.compare_modes, ctx.workers)
        ctx.log(f"weyl-extension L={half_width}: gap {gap:.4g}")
        gaps.append(gap)
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    metrics: dict[str, float | None] = {f"gap_L{v:g}": g for v, g in zip(params.L_values, gaps)}
    return ExperimentOutcome(
        metrics,
        {"monotone": monotone, "final_gap": gaps[-1] < params.gap_tol},
        {"measure": measure_summary(mu), "L_values": list(params.L_values)},
    )


# tau-sweep


@dataclass(frozen=True)
class TauSweepParams:
    taus: tuple[float, ...] = _param((0.0, 0.5, 1.0), "quantization parameters tau")
    radius: float = _param(1.0, "circle radius")
    nodes_per_mode: int = _param(4, "circle nodes per Hermite mode")
    agree_tol: float = _param(0.1, "allowed spread of the thresholds")
    p_tol: float = _param(0.1, "tolerance on each p* around 4d/(2d-1)")


def run_tau_sweep(params: TauSweepParams, ctx: ExperimentContext) -> ExperimentOutcome:
    basis = ctx.basis()
    n = basis.size
    mu = circle(params.radius, max(256, params.nodes_per_mode * n))
    # sorted values beyond 3N/8 are distorted by the truncation
    fit = (max(1, n // 16), max(4, 3 * n // 8))
    expected_p = 4.0 * DIMENSION / (2.0 * DIMENSION - 1.0)
    thresholds: dict[str, float | None] = {}
    spectrum = None
    for tau in params.taus:
        values = singular_spectrum(tau_extension(mu, tau, basis, ctx.workers)).values
        p_star, slope = spectrum_threshold(values, fit)
        thresholds[f"p_star_tau{tau:g}"] = p_star
        thresholds[f"slope_tau{tau:g}"] = slope
        if tau == 0.5 or spectrum is None:
            spectrum = values
        ctx.log(f"tau={tau:g}: p* {p_star}, slope {slope:.4f}")

    found = [v for k, v in thresholds.items() if k.startswith("p_star") and v is not None]
    spread = max(found) - min(found) if len(found) == len(params.taus) else None
    symbol = _gaussian(ctx.phase_grid(6.0, 64))
    identical = bool(
        np.array_equal(
            tau_quantize(symbol, 0.5, basis, ctx.workers).entries,
            weyl_quantize(symbol, basis, ctx.workers).entries,
        )
    )
    metrics = dict(thresholds)
    metrics["threshold_spread"] = spread
    passes = {}
    for tau in params.taus:
        p_star = thresholds[f"p_star_tau{tau:g}"]
        ok = p_star is not None and abs(p_star - expected_p) <= params.p_tol
        passes[f"p_star_tau{tau:g}"] = ok
    passes["thresholds_agree"] = spread is not None and spread <= params.agree_tol
    passes["half_is_weyl"] = identical
    return ExperimentOutcome(
        metrics,
        passes,
        {"fit_range": list(fit), "nodes": mu.size, "expected_p": expected_p},
        spectrum=spectrum,
    )


# compactness


@dataclass(frozen=True)
class CompactnessParams:
    measure: str | dict = _param("circle", "measure name, file or mapping")
    circle_nodes: int = _param(8192, "quadrature nodes of the circle measure")
    cantor_level: int = _param(2, "level of the Cantor measure")
    threshold: float = _param(0.05, "singular-value level for the compactness verdict")
    regularity: bool = _param(True, "estimate beta for the corollary bound 4d/beta")
    frequency_range: tuple[float, float] = _param(
        (8.0, 512.0), "frequency band of the beta fit"
    )
    p_min: float = _param(2.0, "smallest exponent of the threshold sweep")
    p_max: float = _param(8.0, "largest exponent of the threshold sweep")
    p_steps: int = _param(25, "exponents on the threshold sweep")
    agree_tol: float = _param(0.15, "allowed gap between 4d/beta and p*")
    expected: str | None = _param(None, "expected verdict (default: from the measure kind)")


def run_compactness(params: CompactnessParams, ctx: ExperimentContext) -> ExperimentOutcome:
    mu = resolve_measure(params.measure, params.circle_nodes, params.cantor_level)
    n = ctx.size
    sizes = sorted({max(1, n // 4), max(2, n // 2), n})
    regularity = None
    if params.regularity and mu.size >= 16:
        regularity = regularity_estimates(
            mu,
            seed=ctx.seed,
            frequency_range=tuple(params.frequency_range),
            workers=ctx.workers,
        )
    p_grid = np.linspace(params.p_min, params.p_max, params.p_steps)
    report = compactness_probe(mu, sizes, params.threshold, regularity, p_grid, 16, ctx.workers)
    expected = params.expected or ("not compact" if mu.kind == "dirac" else "compact-consistent")
    passes = {"verdict": report.verdict == expected}
    if report.agreement is not None:
        passes["corollary_agreement"] = report.agreement <= params.agree_tol
    ctx.log(f"compactness: verdict {report.verdict}, agreement {report.agreement}")
    return ExperimentOutcome(
        metrics={
            "first_below": None if report.first_below is None else float(report.first_below),
            "leading_value": report.leading_values[-1][0],
            "beta_hat": report.beta_hat,
            "corollary_p": report.corollary_p,
            "p_star": report.p_star,
            "agreement": report.agreement,
        },
        passes=passes,
        details={
            "verdict": report.verdict,
            "expected": expected,
            "sizes": list(report.sizes),
            "stability": list(report.stability),
            "leading_values": [list(v) for v in report.leading_values],
            "measure": measure_summary(mu),
        },
    )


# bak-ratios


@dataclass(frozen=True)
class BakRatiosParams:
    measure: str | dict = _param("circle", "measure name, file or mapping")
    circle_nodes: int = _param(256, "quadrature nodes of the circle measure")
    alpha: float = _param(1.0, "ball-growth exponent of the measure")
    beta: float = _param(1.0, "Fourier-decay exponent of the measure")
    p_prime: float | None = _param(None, "Schatten exponent (default 2(4d - 2 alpha + beta)/beta)")
    samples: int = _param(200, "random densities G")
    growth_tol: float = _param(0.1, "allowed relative growth of the max ratio from N to 2N")


def run_bak_ratios(params: BakRatiosParams, ctx: ExperimentContext) -> ExperimentOutcome:
    mu = resolve_measure(params.measure, params.circle_nodes)
    p_prime = params.p_prime or bak_exponent_bound(params.alpha, params.beta)
    stats = bak_ratio_sampler(mu, p_prime, params.samples, ctx.seed, ctx.size, ctx.workers)
    rng = ctx.rng(5)
    values = rng.standard_normal(mu.size) + 1j * rng.standard_normal(mu.size)
    bound = extension_bound_check(values, mu, ctx.size, ctx.phase_grid(6.0, 64), ctx.workers)
    ctx.log(f"bak ratios p'={p_prime:.3f}: max {stats.max_ratio:.4g}")
    return ExperimentOutcome(
        metrics={
            "p_prime": stats.p_prime,
            "max_ratio": stats.max_ratio,
            "median_ratio": stats.median_ratio,
            "min_ratio": stats.min_ratio,
        },
        passes={
            "finite": math.isfinite(stats.max_ratio),
            "classical_extension_bound": bound.classical_ok,
            "quantum_extension_bound": bound.quantum_ok,
        },
        details={
            "samples": stats.n_samples,
            "measure": measure_summary(mu),
            "measure_l1": bound.measure_l1,
            "classical_sup": bound.classical_sup,
            "quantum_operator_norm": bound.quantum_operator_norm,
        },
    )


# regularity


@dataclass(frozen=True)
class RegularityParams:
    measure: str | dict = _param("circle", "measure name, file or mapping")
    circle_nodes: int = _param(4096, "quadrature nodes of the circle measure")
    cantor_level: int = _param(5, "level of the Cantor measure")
    cantor_contraction: float = _param(1.0 / 3.0, "contraction ratio of the Cantor measure")
    radius_samples: int = _param(11, "scales in each fit")
    expected_alpha: float | None = _param(None, "expected alpha (default: from the measure)")
    expected_beta: float | None = _param(None, "expected beta (default: from the measure)")
    tol: float = _param(0.2, "tolerance on the fitted exponents")
    reweight: bool = _param(True, "report the Gaussian reweighting constant")


def _expected_exponents(
    mu: DiscreteMeasure, contraction: float
) -> tuple[float | None, float | None]:
    """Known exponents: circle (1, 1), point mass (0, 0).

    The product Cantor measure has ``alpha = 2 log 2 / log(1/c)`` and no usable decay.
    """

    if mu.kind == "circle":
        return 1.0, 1.0
    if mu.kind == "cantor":
        return 2.0 * math.log(2.0) / math.log(1.0 / contraction), None
    if mu.kind == "dirac":
        return 0.0, 0.0
    return None, None


def _within(value: float | None, target: float, tol: float) -> bool:
    return value is not None and abs(value - target) <= tol


def run_regularity(params: RegularityParams, ctx: ExperimentContext) -> ExperimentOutcome:
    mu = resolve_measure(
        params.measure, params.circle_nodes, params.cantor_level, params.cantor_contraction
    )
    estimate = regularity_estimates(
        mu,
        ray_count=ctx.size,
        radius_samples=params.radius_samples,
        seed=ctx.seed,
        workers=ctx.workers,
    )
    contraction = params.cantor_contraction
    if isinstance(params.measure, dict):
        contraction = float(params.measure.get("contraction", contraction))
    auto_alpha, auto_beta = _expected_exponents(mu, contraction)
    alpha = params.expected_alpha if params.expected_alpha is not None else auto_alpha
    beta = params.expected_beta if params.expected_beta is not None else auto_beta
    passes = {"fit_ok": estimate.ok}
    if alpha is not None:
        passes["alpha"] = _within(estimate.alpha_hat, alpha, params.tol)
    if beta is not None:
        passes["beta"] = _within(estimate.beta_hat, beta, params.tol)
    bak = None
    if estimate.alpha_hat is not None and estimate.beta_hat:
        bak = bak_exponent_bound(estimate.alpha_hat, estimate.beta_hat)
    metrics: dict[str, float | None] = {
        "alpha_hat": estimate.alpha_hat,
        "beta_hat": estimate.beta_hat,
        "hambrook_laba_bound": estimate.hambrook_laba_bound(),
        "corollary_bound": estimate.corollary_bound(),
        "bak_exponent": bak,
    }
    if params.reweight:
        metrics["reweight_constant"] = reweight_constant(mu)
    ctx.log(f"regularity: alpha {estimate.alpha_hat}, beta {estimate.beta_hat}")
    return ExperimentOutcome(
        metrics,
        passes,
        {
            "flags": list(estimate.flags),
            "expected_alpha": alpha,
            "expected_beta": beta,
            "measure": measure_summary(mu),
        },
    )


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment(
            "sphere-schatten",
            "Schatten threshold of the circle extension operator",
            "E_W(1) of a circle lies in S^p iff p > 4d/(2d - 1)",
            SphereSchattenParams,
            run_sphere_schatten,
            1_000_000,
            size_meaning="number of eigenvalues n_max",
            needs_gate=False,
            stable=(("p_star", 0.05),),
        ),
        Experiment(
            "transfer",
            "Pointwise transfer identities and window floors between extension problems",
            "F_sigma(Q_T) = F_W(T) A(g_z0, g_0) on supp mu",
            TransferParams,
            run_transfer,
            32,
        ),
        Experiment(
            "werner-young",
            "Randomized Werner-Young inequalities for QHA convolutions",
            "||F * S||_{S^r} <= ||F||_p ||S||_{S^q}",
            WernerYoungParams,
            run_werner_young,
            16,
        ),
        Experiment(
            "convolution-theorem",
            "Fourier-Wigner convolution theorems for F*S and S*T",
            "F_W(F * S) = F_sigma(F) F_W(S)",
            ConvolutionTheoremParams,
            run_convolution_theorem,
            32,
        ),
        Experiment(
            "pool-isometry",
            "Weyl quantization isometry, orthogonality relations and inversion",
            "Moyal identity and the Weyl isometry",
            PoolIsometryParams,
            run_pool_isometry,
            64,
        ),
        Experiment(
            "weyl-extension",
            "Weyl quantization of the classical extension vs the quantum extension",
            "L_{E_sigma(1)} = E_W(1)",
            WeylExtensionParams,
            run_weyl_extension,
            64,
        ),
        Experiment(
            "tau-sweep",
            "Schatten thresholds of tau-quantized circle extensions",
            "Schatten threshold independent of tau",
            TauSweepParams,
            run_tau_sweep,
            128,
        ),
        Experiment(
            "compactness",
            "Compactness probe of E_W(1) with the corollary bound 4d/beta",
            "E_W(1) compact iff F_sigma(mu) vanishes at infinity",
            CompactnessParams,
            run_compactness,
            512,
        ),
        Experiment(
            "bak-ratios",
            "Empirical extension ratios at the exponent 2(4d - 2 alpha + beta)/beta",
            "extension bound at p' = 2(4d - 2 alpha + beta)/beta",
            BakRatiosParams,
            run_bak_ratios,
            64,
            stable=(("max_ratio", 0.1),),
        ),
        Experiment(
            "regularity",
            "Ball-growth and Fourier-decay exponents of a measure",
            "ball growth r^alpha and Fourier decay |z|^(-beta/2)",
            RegularityParams,
            run_regularity,
            64,
            size_meaning="number of rays",
            needs_gate=False,
        ),
    )
}


def list_experiments() -> list[tuple[str, str, str]]:
    return [(e.name, e.description, e.anchor) for e in EXPERIMENTS.values()]


def get_experiment(name: str) -> Experiment:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise ConfigError(
            f"Unknown experiment {name!r}; available: {', '.join(EXPERIMENTS)}"
        ) from None
