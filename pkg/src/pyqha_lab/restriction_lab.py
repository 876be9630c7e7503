"""Quantum and classical extension operators for finite measures, the transfer
identities between them, and the spectral diagnostics built on top.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import optimize

from .errors import ValidationGateError
from .hermite_rep import (
    HermiteBasis,
    ambiguity,
    rho_diagonals,
    rho_matrices,
    shifted_gaussian,
)
from .laguerre import laguerre_functions
from .operator_calculus import (
    OperatorMatrix,
    conv_fun_op,
    fourier_wigner,
    grid_conv_op_ops,
    rank_one,
    rho_chunk_size,
    schatten_norm,
    singular_spectrum,
    size_and_fingerprint,
    weyl_quantize,
)
from .parallel import chunk_bounds, chunked_map
from .phase_space import (
    DIMENSION,
    DiscreteMeasure,
    PhaseFunction,
    PhaseGrid,
    PhasePoint,
    RegularityEstimate,
    circle,
    fourier_of_atoms,
    grid_lp_norm,
    nonuniform_symplectic_fourier,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-6
FLOOR_SLACK = 1e-9
CLOSED_FORM_TOL = 1e-8
VALIDATION_MODES = 256
VALIDATION_NODES = 4096
SAMPLE_BATCH = 16
TRANSFER_GRID = PhaseGrid(6.0, 64)


def _weights_times(values: Sequence[complex] | np.ndarray, mu: DiscreteMeasure) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    if values.shape != (mu.size,):
        raise ValueError(f"expected {mu.size} values on the atoms, got shape {values.shape}")
    return mu.weights * values


def _atom_operator_sum(
    atoms: np.ndarray, weights: np.ndarray, n: int, workers: int | None
) -> np.ndarray:
    """``sum_j w_j rho(z_j)``; ``weights`` may carry a leading sample axis."""

    weights = np.atleast_2d(weights)
    bounds = chunk_bounds(len(atoms), rho_chunk_size(n))

    def run(lo: int, hi: int) -> np.ndarray:
        partials = []
        for start, stop in bounds[lo:hi]:
            mats = rho_matrices(atoms[start:stop], n)
            partials.append(np.einsum("sk,kmn->smn", weights[:, start:stop], mats))
        return np.array(partials)

    partials = chunked_map(run, len(bounds), 1, workers)
    return np.sum(partials, axis=0)


def quantum_extension(
    values: Sequence[complex] | np.ndarray,
    mu: DiscreteMeasure,
    basis: HermiteBasis | int,
    workers: int | None = None,
) -> OperatorMatrix:
    """``E_W(G) = int G(z) rho(z) dmu(z) = sum_j w_j G(z_j) rho(z_j)``."""

    n, fingerprint = size_and_fingerprint(basis)
    weights = _weights_times(values, mu)
    entries = _atom_operator_sum(mu.atoms, weights, n, workers)[0]
    return OperatorMatrix(entries, fingerprint)


def classical_extension(
    values: Sequence[complex] | np.ndarray,
    mu: DiscreteMeasure,
    grid: PhaseGrid,
    workers: int | None = None,
) -> PhaseFunction:
    """``E_sigma(G)(z) = F_sigma(G dmu)(z)`` at every node of ``grid``."""

    weights = _weights_times(values, mu)
    m = grid.points_per_axis
    samples = fourier_of_atoms(mu.atoms, weights, grid.points(), workers)
    return PhaseFunction(grid, samples.reshape(m, m))


@dataclass(frozen=True)
class TransferReport:
    direction: str
    identity_error: float
    window_floor: float
    theoretical_floor: float
    radius: float
    center: PhasePoint

    @property
    def constant_ratio(self) -> float:
        """Factor ``e^{pi R^2 / 2}`` relating the operator and function constants."""

        return math.exp(0.5 * math.pi * self.radius**2)

    @property
    def identity_ok(self) -> bool:
        return self.identity_error < IDENTITY_TOL

    @property
    def floor_ok(self) -> bool:
        return self.window_floor >= self.theoretical_floor - FLOOR_SLACK

    @property
    def passed(self) -> bool:
        return self.identity_ok and self.floor_ok


def relative_sup_error(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(float(np.abs(lhs).max(initial=0.0)), float(np.abs(rhs).max(initial=0.0)))
    if scale == 0.0:
        return 0.0
    return float(np.abs(lhs - rhs).max()) / scale


def _transfer_windows(
    mu: DiscreteMeasure, basis: HermiteBasis
) -> tuple[OperatorMatrix, np.ndarray]:
    """Cohen window ``g_z0 (x) g_0`` and ``A(g_z0, g_0)`` on the atoms of ``mu``."""

    window = shifted_gaussian(mu.center, basis.grid)
    gaussian = basis.wave(0)
    values = np.array([ambiguity(window, gaussian, z) for z in mu.atom_points()], dtype=complex)
    return rank_one(window, gaussian, basis), values


def _transfer_report(
    direction: str, lhs: np.ndarray, rhs: np.ndarray, window_values: np.ndarray, mu: DiscreteMeasure
) -> TransferReport:
    report = TransferReport(
        direction,
        relative_sup_error(lhs, rhs),
        float(np.abs(window_values).min()),
        math.exp(-0.5 * math.pi * mu.radius_bound**2),
        mu.radius_bound,
        mu.center,
    )
    logger.debug(
        "transfer %s: error %.3g, floor %.6g vs %.6g",
        direction,
        report.identity_error,
        report.window_floor,
        report.theoretical_floor,
    )
    return report


def transfer_checks(
    ops: Sequence[OperatorMatrix],
    mu: DiscreteMeasure,
    basis: HermiteBasis,
    grid: PhaseGrid | None = None,
    workers: int | None = None,
) -> list[TransferReport]:
    """Operator-direction transfer identity for several operators sharing one grid pass."""

    cohen_window, window_values = _transfer_windows(mu, basis)
    grid = grid or TRANSFER_GRID
    cohens = grid_conv_op_ops(cohen_window, ops, grid, workers)
    reports = []
    for op, cohen in zip(ops, cohens):
        lhs = nonuniform_symplectic_fourier(cohen, mu.atoms, workers)
        rhs = fourier_wigner(op, mu.atoms, basis, workers) * window_values
        reports.append(_transfer_report("operator", lhs, rhs, window_values, mu))
    return reports


def transfer_check(
    direction: Literal["operator", "function"],
    value: OperatorMatrix | PhaseFunction,
    mu: DiscreteMeasure,
    basis: HermiteBasis,
    grid: PhaseGrid | None = None,
    workers: int | None = None,
) -> TransferReport:
    """Evaluate the pointwise transfer identity on every atom of ``mu``.

    ``operator``: ``F_sigma(Q_T(g_0, g_z0)) = F_W(T) A(g_z0, g_0)`` with the Cohen-class
    function ``Q_T(g_0, g_z0) = (g_z0 (x) g_0) * T`` sampled on ``grid``.
    ``function``: ``F_W(F * (g_z0 (x) g_0)) = A(g_z0, g_0) F_sigma(F)``.
    """

    if direction == "operator":
        if not isinstance(value, OperatorMatrix):
            raise TypeError("operator direction expects an OperatorMatrix")
        return transfer_checks([value], mu, basis, grid, workers)[0]
    if direction != "function":
        raise ValueError(f"direction must be 'operator' or 'function', got {direction!r}")
    if not isinstance(value, PhaseFunction):
        raise TypeError("function direction expects a PhaseFunction")
    cohen_window, window_values = _transfer_windows(mu, basis)
    localized = conv_fun_op(value, cohen_window, workers)
    lhs = fourier_wigner(localized, mu.atoms, basis, workers)
    rhs = window_values * nonuniform_symplectic_fourier(value, mu.atoms, workers)
    return _transfer_report("function", lhs, rhs, window_values, mu)


def adjoint_duality_check(
    values: Sequence[complex] | np.ndarray,
    op: OperatorMatrix,
    mu: DiscreteMeasure,
    basis: HermiteBasis | None = None,
    workers: int | None = None,
) -> tuple[complex, complex]:
    """``(<Phi, F_W(T)>_{L^2(mu)}, tr(E_W(Phi) T^*))``."""

    weights = _weights_times(values, mu)
    restricted = fourier_wigner(op, mu.atoms, basis, workers)
    lhs = complex(np.sum(weights * np.conj(restricted)))
    extension = quantum_extension(values, mu, basis if basis is not None else op.dim, workers)
    rhs = complex(np.sum(extension.entries * np.conj(op.entries)))
    return lhs, rhs


@dataclass(frozen=True)
class ExtensionBoundReport:
    measure_l1: float
    classical_sup: float
    quantum_operator_norm: float

    @property
    def classical_ok(self) -> bool:
        return self.classical_sup <= self.measure_l1 * (1.0 + 1e-12) + FLOOR_SLACK

    @property
    def quantum_ok(self) -> bool:
        return self.quantum_operator_norm <= self.measure_l1 * (1.0 + 1e-12) + FLOOR_SLACK

    @property
    def passed(self) -> bool:
        return self.classical_ok and self.quantum_ok


def extension_bound_check(
    values: Sequence[complex] | np.ndarray,
    mu: DiscreteMeasure,
    basis: HermiteBasis | int,
    grid: PhaseGrid,
    workers: int | None = None,
) -> ExtensionBoundReport:
    """The ``(p, q) = (1, inf)`` case, where both extension constants equal 1."""

    weights = _weights_times(values, mu)
    classical = classical_extension(values, mu, grid, workers)
    quantum = quantum_extension(values, mu, basis, workers)
    return ExtensionBoundReport(
        float(np.sum(np.abs(weights))),
        grid_lp_norm(classical, math.inf),
        schatten_norm(quantum, math.inf),
    )


def weyl_extension_gap(
    mu: DiscreteMeasure,
    basis: HermiteBasis,
    grid: PhaseGrid,
    compare_modes: int | None = None,
    workers: int | None = None,
) -> float:
    """Relative HS distance between ``L_{E_sigma 1}`` and ``E_W 1`` on the leading block."""

    ones = np.ones(mu.size)
    quantized = weyl_quantize(classical_extension(ones, mu, grid, workers), basis, workers)
    direct = quantum_extension(ones, mu, basis, workers)
    k = compare_modes or max(1, basis.size // 4)
    diff = quantized.entries[:k, :k] - direct.entries[:k, :k]
    return float(np.linalg.norm(diff) / np.linalg.norm(direct.entries[:k, :k]))


def tau_factor(atoms: np.ndarray, tau: float) -> np.ndarray:
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if tau == 0.5:
        return np.ones(len(atoms), dtype=complex)
    return np.exp(-1j * np.pi * (2.0 * tau - 1.0) * atoms[:, 0] * atoms[:, 1])


def tau_extension(
    mu: DiscreteMeasure,
    tau: float,
    basis: HermiteBasis | int,
    workers: int | None = None,
) -> OperatorMatrix:
    """``L^tau_{F_sigma(mu)} = int exp(-pi i (2 tau - 1) x xi) rho(x, xi) dmu(x, xi)``."""

    return quantum_extension(tau_factor(mu.atoms, tau), mu, basis, workers)


@dataclass(frozen=True, eq=False)
class CircleSpectrum:
    values: np.ndarray
    radius: float
    mass: float
    method: str
    validation_error: float | None = None
    flags: tuple[str, ...] = ()


def _diagonal_quadrature(mu: DiscreteMeasure, n: int) -> np.ndarray:
    """``sum_k w_k <m| rho(z_k) |m>`` for ``m < n``."""

    return np.real(mu.weights @ rho_diagonals(mu.atoms, n))


def circle_spectrum(
    radius: float,
    n_max: int,
    mass: float = 1.0,
    validate: bool = True,
) -> CircleSpectrum:
    """Eigenvalues of ``E_W(1)`` for the uniform circle measure.

    The operator is diagonal in the Hermite basis.  The Laguerre closed form
    ``mass e^{-pi r^2 / 2} L_n(pi r^2)`` is checked against the quadrature diagonal of
    ``E_W(1)`` on the first modes before it is used.  When the check fails the quadrature
    diagonal is returned if it covers every requested mode; otherwise
    :class:`ValidationGateError` is raised.
    """

    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    closed = mass * laguerre_functions(n_max, math.pi * radius**2)
    if not np.all(np.isfinite(closed)):
        logger.warning("closed-form circle spectrum produced non-finite values")
        return CircleSpectrum(closed, radius, mass, "closed-form", None, ("non-finite",))
    if not validate:
        return CircleSpectrum(closed, radius, mass, "closed-form")

    modes = min(n_max, VALIDATION_MODES)
    oracle = _diagonal_quadrature(circle(radius, VALIDATION_NODES, mass), modes)
    error = float(np.abs(oracle - closed[:modes]).max())
    if error <= CLOSED_FORM_TOL:
        logger.info("circle spectrum closed form validated on %d modes (error %.3g)", modes, error)
        return CircleSpectrum(closed, radius, mass, "closed-form", error)
    if n_max > modes:
        raise ValidationGateError(
            f"circle spectrum closed form disagrees with quadrature on {modes} modes "
            f"(error {error:.3g} > {CLOSED_FORM_TOL}); no quadrature fallback at n_max={n_max}"
        )
    logger.warning("circle spectrum closed form rejected (error %.3g); using quadrature", error)
    return CircleSpectrum(
        oracle.copy(), radius, mass, "quadrature", error, ("closed-form-rejected",)
    )


@dataclass(frozen=True)
class ThresholdReport:
    decay_exponent: float
    p_grid: tuple[float, ...]
    tail_ratios: tuple[float, ...]
    block_ratios: tuple[float, ...]
    p_star: float | None
    p_star_dyadic: float | None
    p_star_tail: float | None
    rule: str
    level: float
    size: int
    fit_range: tuple[int, int]
    flags: tuple[str, ...] = ()

    @property
    def compact(self) -> bool:
        return "not compact" not in self.flags


def _tail_ratio(mags: np.ndarray, p: float) -> float:
    n = len(mags)
    top = mags.max()
    if top == 0.0:
        return 0.0
    powered = (mags / top) ** p
    return float(np.sum(powered[n // 2 :]) / np.sum(powered))


def _block_ratio(mags: np.ndarray, p: float) -> float:
    n = len(mags)
    top = mags.max()
    if top == 0.0 or n < 4:
        return math.nan
    powered = (mags / top) ** p
    lower = np.sum(powered[n // 4 : n // 2])
    if lower == 0.0:
        return math.inf
    return float(np.sum(powered[n // 2 :]) / lower)


def envelope_decay(mags: np.ndarray, lo: int, hi: int, windows: int = 40) -> float:
    """Slope of log windowed maxima against log index over ``[lo, hi)``."""

    edges = np.unique(np.geomspace(max(lo, 1), hi, windows + 1).astype(int))
    centers, peaks = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        peak = float(mags[a:b].max())
        if peak > 0:
            centers.append(math.sqrt(a * b))
            peaks.append(peak)
    if len(peaks) < 3:
        return math.nan
    slope, _ = np.polyfit(np.log(centers), np.log(peaks), 1)
    return float(slope)


def _crossing(fn, lo: float, hi: float) -> float | None:
    try:
        f_lo, f_hi = fn(lo), fn(hi)
    except (ValueError, ZeroDivisionError):
        return None
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)) or f_lo * f_hi > 0:
        return None
    if f_lo == 0.0:
        return lo
    return float(optimize.brentq(fn, lo, hi, xtol=1e-6))


def schatten_threshold_report(
    eigs: Sequence[float] | np.ndarray,
    p_grid: Sequence[float],
    rule: Literal["dyadic", "tail-crossing"] = "dyadic",
    level: float = 0.05,
    fit_range: tuple[int, int] | None = None,
) -> ThresholdReport:
    """Schatten-threshold diagnostics for an index-ordered eigenvalue sequence.

    ``tail_ratios[p] = sum_{n >= N/2} |l_n|^p / sum_n |l_n|^p``.  ``p_star_dyadic`` is
    where the ratio of the last two dyadic blocks crosses 1; ``p_star_tail`` is where the
    tail ratio crosses ``level``.  ``p_star`` follows ``rule``.
    """

    mags = np.abs(np.asarray(eigs, dtype=float))
    if mags.ndim != 1 or len(mags) < 1:
        raise ValueError("eigenvalues must be a non-empty vector")
    if not np.all(np.isfinite(mags)):
        raise ValueError("eigenvalues must be finite")
    if rule not in ("dyadic", "tail-crossing"):
        raise ValueError(f"rule must be 'dyadic' or 'tail-crossing', got {rule!r}")

    flags: list[str] = []
    n = len(mags)
    if n < 10_000:
        flags.append("short-spectrum")
    if fit_range is None:
        hi = min(100_000, n)
        fit_range = (max(1, min(1000, n // 64)), hi)
    decay = envelope_decay(mags, *fit_range)

    p_values = tuple(float(p) for p in p_grid)
    tails = tuple(_tail_ratio(mags, p) for p in p_values)
    blocks = tuple(_block_ratio(mags, p) for p in p_values)
    if any(b > a + 1e-15 for a, b in zip(tails, tails[1:])):
        flags.append("non-monotone-tail")

    lo, hi = (min(p_values), max(p_values)) if p_values else (1.0, 8.0)
    p_dyadic = _crossing(lambda p: math.log(_block_ratio(mags, p)), lo, hi)
    p_tail = _crossing(lambda p: math.log(_tail_ratio(mags, p) / level), lo, hi)
    p_star = p_dyadic if rule == "dyadic" else p_tail
    if p_star is None and (not math.isfinite(decay) or abs(decay) < 0.01):
        flags.append("not compact")
    logger.debug("threshold: decay %.4f, p*_dyadic %s, p*_tail %s", decay, p_dyadic, p_tail)
    return ThresholdReport(
        decay,
        p_values,
        tails,
        blocks,
        p_star,
        p_dyadic,
        p_tail,
        rule,
        level,
        n,
        (int(fit_range[0]), int(fit_range[1])),
        tuple(flags),
    )


def spectrum_threshold(
    singular_values: Sequence[float] | np.ndarray, fit_range: tuple[int, int] | None = None
) -> tuple[float | None, float]:
    """``(p*, slope)`` from ``s_k ~ k^slope`` on sorted singular values; ``p* = -1/slope``."""

    s = np.sort(np.abs(np.asarray(singular_values, dtype=float)))[::-1]
    n = len(s)
    lo, hi = fit_range or (max(1, n // 64), max(2, n // 8))
    k = np.arange(lo, hi) + 1
    window = s[lo:hi]
    keep = window > 0
    if np.count_nonzero(keep) < 3:
        return None, math.nan
    slope, _ = np.polyfit(np.log(k[keep]), np.log(window[keep]), 1)
    slope = float(slope)
    return (-1.0 / slope if slope < 0 else None), slope


def bak_exponent_bound(alpha: float, beta: float, dimension: int = DIMENSION) -> float:
    """Smallest exponent ``p' = 2(4d - 2 alpha + beta) / beta`` covered by the extension bound."""

    return 2.0 * (4.0 * dimension - 2.0 * alpha + beta) / beta


@dataclass(frozen=True)
class BakRatioStats:
    p_prime: float
    n_samples: int
    seed: int
    size: int
    max_ratio: float
    median_ratio: float
    min_ratio: float


def bak_ratio_sampler(
    mu: DiscreteMeasure,
    p_prime: float,
    n_samples: int,
    seed: int,
    basis: HermiteBasis | int,
    workers: int | None = None,
) -> BakRatioStats:
    """Empirical ``||E_W(G)||_{S^p'} / ||G||_{L^2(mu)}`` over random complex ``G``."""

    if p_prime < 1:
        raise ValueError(f"p_prime must be >= 1, got {p_prime}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    n, fingerprint = size_and_fingerprint(basis)
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((n_samples, mu.size)) + 1j * rng.standard_normal(
        (n_samples, mu.size)
    )
    norms = np.sqrt(np.sum(mu.abs_weights[None, :] * np.abs(samples) ** 2, axis=1))
    samples = samples / norms[:, None]
    weighted = samples * mu.weights[None, :]
    ratios = []
    for start, stop in chunk_bounds(n_samples, SAMPLE_BATCH):
        operators = _atom_operator_sum(mu.atoms, weighted[start:stop], n, workers)
        ratios.extend(schatten_norm(OperatorMatrix(op, fingerprint), p_prime) for op in operators)
    ratios = np.array(ratios)
    return BakRatioStats(
        float(p_prime),
        int(n_samples),
        int(seed),
        n,
        float(ratios.max()),
        float(np.median(ratios)),
        float(ratios.min()),
    )


@dataclass(frozen=True)
class CompactnessReport:
    sizes: tuple[int, ...]
    leading_values: tuple[tuple[float, ...], ...]
    stability: tuple[float, ...]
    first_below: int | None
    threshold: float
    verdict: str
    beta_hat: float | None
    corollary_p: float | None
    p_star: float | None

    @property
    def agreement(self) -> float | None:
        if self.corollary_p is None or self.p_star is None:
            return None
        return abs(self.corollary_p - self.p_star)


def _extension_singular_values(
    mu: DiscreteMeasure, n: int, workers: int | None
) -> np.ndarray:
    if mu.kind == "circle":
        radius = float(np.hypot(*(mu.atoms[0] - mu.center.as_array())))
        spectrum = circle_spectrum(radius, n, float(np.sum(mu.weights).real), validate=False)
        return np.sort(np.abs(spectrum.values))[::-1]
    return singular_spectrum(quantum_extension(np.ones(mu.size), mu, n, workers)).values


def compactness_probe(
    mu: DiscreteMeasure,
    sizes: Sequence[int],
    threshold: float = 0.05,
    regularity: RegularityEstimate | None = None,
    p_grid: Sequence[float] | None = None,
    leading: int = 16,
    workers: int | None = None,
) -> CompactnessReport:
    """Singular values of ``E_W(1)`` across truncations, with the compactness verdict."""

    sizes = tuple(int(n) for n in sizes)
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"sizes must be a non-empty ascending sequence, got {sizes}")

    spectra = [_extension_singular_values(mu, n, workers) for n in sizes]
    stability = tuple(
        float(np.abs(b[: len(a) // 4 or 1] - a[: len(a) // 4 or 1]).max())
        for a, b in zip(spectra, spectra[1:])
    )
    last = spectra[-1]
    below = np.flatnonzero(last < threshold)
    first_below = int(below[0]) if below.size else None
    if float(np.median(last)) >= 1.0 - 1e-6:
        verdict = "not compact"
    elif first_below is not None:
        verdict = "compact-consistent"
    else:
        verdict = "inconclusive"

    beta_hat = regularity.beta_hat if regularity is not None else None
    corollary_p = 4.0 * DIMENSION / beta_hat if beta_hat else None
    p_star = None
    if verdict != "not compact":
        if mu.kind == "circle" and p_grid is not None:
            radius = float(np.hypot(*(mu.atoms[0] - mu.center.as_array())))
            eigs = circle_spectrum(radius, max(sizes[-1], 2**16), validate=False).values
            p_star = schatten_threshold_report(eigs, p_grid).p_star
        elif p_grid is not None:
            p_star, _ = spectrum_threshold(last)
    logger.info("compactness probe (%s): verdict %s, first below %s", mu.kind, verdict, first_below)
    return CompactnessReport(
        sizes,
        tuple(tuple(float(v) for v in s[:leading]) for s in spectra),
        stability,
        first_below,
        threshold,
        verdict,
        beta_hat,
        corollary_p,
        p_star,
    )
