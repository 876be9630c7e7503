"""Hermite functions, the Schroedinger representation in the Hermite basis and the
time-frequency representations ``A(f, g)`` / ``W(f, g)``.

``rho(x, xi) g(t) = exp(-pi i x xi) exp(2 pi i t xi) g(t - x)`` is the displacement
``D(alpha)`` with ``alpha = sqrt(pi) (x + i xi)``; entry ``(m, n)`` of its matrix is
``<rho(z) h_n, h_m>`` and ``A(h_m, h_n)(z)`` is the complex conjugate of that entry.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
from scipy import special

from .errors import GridSizingError, ValidationGateError
from .laguerre import displacement_element, njit
from .parallel import chunked_map
from .phase_space import (
    PhaseFunction,
    PhaseGrid,
    PhasePoint,
    as_points,
    symplectic_form,
    symplectic_fourier,
)

if TYPE_CHECKING:
    from .operator_calculus import OperatorMatrix

logger = logging.getLogger(__name__)

BASIS_FORMAT_VERSION = 1
SINC_HALF_WIDTH = 16
SINC_RADIUS = 2.6
BOUNDARY_TOL = 1e-12
# exp(-|alpha|^2 / 2) underflows past this; such points use the closed form.
RECURRENCE_MAX_ABS2 = 1400.0
GATE_GRID = (6.5, 2048)


@dataclass(frozen=True)
class LineGrid:
    half_width: float
    points: int

    def __post_init__(self) -> None:
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise GridSizingError(f"half_width must be positive, got {self.half_width}")
        if self.points < 2 or self.points % 2:
            raise GridSizingError(f"points must be an even positive integer, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def nodes(self) -> np.ndarray:
        return self.spacing * (np.arange(self.points) - self.points // 2)

    @property
    def key(self) -> tuple[float, int]:
        return (float(self.half_width), int(self.points))

    def dual(self) -> LineGrid:
        return LineGrid(1.0 / (2.0 * self.spacing), self.points)


def sizing_rule(n: int) -> tuple[float, int]:
    """Minimal ``(T, M_t)`` for a basis of size ``n``."""

    half_width = math.sqrt(n / math.pi) + 2.0
    return half_width, 8 * math.ceil(half_width**2)


def line_grid_for(n: int, oversample: int = 1) -> LineGrid:
    half_width, _ = sizing_rule(n)
    half_width = math.ceil(2.0 * half_width) / 2.0
    return LineGrid(half_width, 8 * math.ceil(half_width**2) * oversample)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: LineGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.points,):
            raise ValueError(f"values must have shape ({self.grid.points},), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("WaveFunction values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: LineGrid, fn: Callable[[np.ndarray], np.ndarray]) -> WaveFunction:
        t = grid.nodes
        return cls(grid, np.asarray(fn(t), dtype=complex) * np.ones_like(t))

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.spacing * float(np.sum(np.abs(self.values) ** 2)))


def inner(f: WaveFunction, g: WaveFunction) -> complex:
    """``<f, g> = int f conj(g)`` by the trapezoid rule."""

    _require_same_grid(f.grid, g.grid)
    return complex(f.grid.spacing * np.sum(f.values * np.conj(g.values)))


def _require_same_grid(a: LineGrid, b: LineGrid) -> None:
    if a != b:
        raise ValueError(f"wave functions live on different grids: {a} vs {b}")


@njit(cache=True)
def _hermite_table(n_max, t):
    out = np.zeros((n_max, t.shape[0]))
    rescale = 1e150
    log_rescale = math.log(rescale)
    for j in range(t.shape[0]):
        tj = t[j]
        log_scale = -math.pi * tj * tj + 0.25 * math.log(2.0)
        prev = 0.0
        cur = 1.0
        out[0, j] = math.exp(log_scale)
        for n in range(n_max - 1):
            nxt = math.sqrt(4.0 * math.pi / (n + 1.0)) * tj * cur - math.sqrt(n / (n + 1.0)) * prev
            prev = cur
            cur = nxt
            if abs(cur) > rescale:
                cur /= rescale
                prev /= rescale
                log_scale += log_rescale
            if cur != 0.0:
                value = math.exp(math.log(abs(cur)) + log_scale)
                out[n + 1, j] = value if cur > 0 else -value
    return out


def hermite_functions(n_max: int, t: np.ndarray) -> np.ndarray:
    """Samples of ``h_0 .. h_{n_max-1}`` at arbitrary points, shape ``(n_max, len(t))``.

    Values are computed at ``|t|`` and odd orders are sign-flipped for negative ``t``,
    so ``h_n(-t) = (-1)^n h_n(t)`` holds bit for bit.
    """

    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    t = np.asarray(t, dtype=float)
    table = _hermite_table(int(n_max), np.ascontiguousarray(np.abs(t)))
    odd = (np.arange(n_max) % 2 == 1)[:, None]
    return np.where(odd & (t < 0)[None, :], -table, table)


@dataclass(frozen=True, eq=False)
class HermiteBasis:
    size: int
    grid: LineGrid
    table: np.ndarray
    fingerprint: str = ""

    def __post_init__(self) -> None:
        if self.table.shape != (self.size, self.grid.points):
            raise ValueError(
                f"table must have shape ({self.size}, {self.grid.points}), got {self.table.shape}"
            )
        if not self.fingerprint:
            fingerprint = basis_fingerprint(self.size, self.grid, self.table)
            object.__setattr__(self, "fingerprint", fingerprint)

    def wave(self, n: int) -> WaveFunction:
        return WaveFunction(self.grid, self.table[n])

    def gram(self) -> np.ndarray:
        return self.grid.spacing * (self.table @ self.table.T)


def basis_fingerprint(size: int, grid: LineGrid, table: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(f"{BASIS_FORMAT_VERSION}:{size}:{grid.half_width!r}:{grid.points}".encode())
    digest.update(np.ascontiguousarray(table, dtype=np.float64).tobytes())
    return digest.hexdigest()[:16]


def check_sizing(n: int, grid: LineGrid) -> None:
    min_half_width, _ = sizing_rule(n)
    needed_points = 8 * math.ceil(grid.half_width**2)
    if grid.half_width < min_half_width * (1.0 - 1e-12) or grid.points < needed_points:
        t_min, m_min = sizing_rule(n)
        raise GridSizingError(
            f"LineGrid(T={grid.half_width}, M_t={grid.points}) is too small for N={n}; "
            f"need T >= {t_min:.4f} and M_t >= 8*ceil(T^2) (minimal: T={t_min:.4f}, M_t={m_min})"
        )


def hermite_basis(n: int, grid: LineGrid) -> HermiteBasis:
    if n < 1:
        raise ValueError(f"basis size must be >= 1, got {n}")
    check_sizing(n, grid)
    table = hermite_functions(n, grid.nodes)
    logger.debug("built Hermite basis N=%d on T=%s M_t=%d", n, grid.half_width, grid.points)
    return HermiteBasis(n, grid, table)


def coefficients(f: WaveFunction, basis: HermiteBasis) -> np.ndarray:
    """``c_m = <f, h_m>``."""

    _require_same_grid(f.grid, basis.grid)
    return basis.grid.spacing * (basis.table @ f.values)


def synthesize(coeffs: np.ndarray, basis: HermiteBasis) -> WaveFunction:
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (basis.size,):
        raise ValueError(f"expected {basis.size} coefficients, got shape {coeffs.shape}")
    return WaveFunction(basis.grid, coeffs @ basis.table)


def _sinc_weights(frac: float) -> np.ndarray:
    d = np.arange(-SINC_HALF_WIDTH + 1, SINC_HALF_WIDTH + 1)
    u = frac - d
    return np.sinc(u) * np.exp(-0.5 * (u / SINC_RADIUS) ** 2)


def shift_samples(values: np.ndarray, shift: float, spacing: float) -> np.ndarray:
    """Band-limited samples of ``v(t + shift)`` on the same nodes; zero outside the line."""

    values = np.asarray(values)
    n_points = values.shape[-1]
    steps = shift / spacing
    whole = math.floor(steps)
    frac = steps - whole
    if frac == 0.0:
        weights = np.array([1.0])
        offsets = np.array([0])
    else:
        weights = _sinc_weights(frac)
        offsets = np.arange(-SINC_HALF_WIDTH + 1, SINC_HALF_WIDTH + 1)
    pad = abs(whole) + SINC_HALF_WIDTH + 1
    padded = np.zeros(values.shape[:-1] + (n_points + 2 * pad,), dtype=values.dtype)
    padded[..., pad : pad + n_points] = values
    out = np.zeros(values.shape, dtype=np.result_type(values.dtype, float))
    for w, d in zip(weights, offsets):
        start = pad + whole + int(d)
        out += w * padded[..., start : start + n_points]
    return out


def _ambiguity_rows(
    f_rows: np.ndarray, g_rows: np.ndarray, grid: LineGrid, z: PhasePoint
) -> np.ndarray:
    t = grid.nodes
    f_shift = shift_samples(f_rows, 0.5 * z.x, grid.spacing)
    g_shift = shift_samples(g_rows, -0.5 * z.x, grid.spacing)
    modulation = np.exp(-2j * np.pi * z.xi * t)
    return grid.spacing * ((f_shift * modulation) @ np.conj(g_shift).T)


def ambiguity(f: WaveFunction, g: WaveFunction, z: PhasePoint) -> complex:
    """``A(f,g)(x,xi) = int f(t + x/2) conj(g(t - x/2)) exp(-2 pi i xi t) dt``."""

    _require_same_grid(f.grid, g.grid)
    if abs(z.x) > f.grid.half_width:
        raise GridSizingError(
            f"|x| = {abs(z.x)} exceeds the line half-width {f.grid.half_width}"
        )
    return complex(_ambiguity_rows(f.values[None, :], g.values[None, :], f.grid, z)[0, 0])


def ambiguity_matrix(basis: HermiteBasis, z: PhasePoint) -> np.ndarray:
    """All ``A(h_m, h_n)(z)`` for ``m, n < N`` by quadrature."""

    return _ambiguity_rows(basis.table, basis.table, basis.grid, z)


def ambiguity_hermite(m: int, n: int, z: PhasePoint) -> complex:
    """Closed form of ``A(h_m, h_n)(z)`` through the scaled Laguerre recurrence."""

    if m < 0 or n < 0:
        raise ValueError(f"Hermite indices must be >= 0, got ({m}, {n})")
    alpha = math.sqrt(math.pi) * complex(z.x, z.xi)
    return displacement_element(m, n, alpha).conjugate()


def ambiguity_on_grid(
    f: WaveFunction, g: WaveFunction, grid: PhaseGrid, workers: int | None = None
) -> PhaseFunction:
    """``A(f, g)`` sampled on every node of ``grid``; windows leaving the line read zeros."""

    _require_same_grid(f.grid, g.grid)
    line = f.grid
    t = line.nodes
    nodes = grid.nodes
    modulation = np.exp(-2j * np.pi * np.outer(t, nodes))

    def chunk(start: int, stop: int) -> np.ndarray:
        rows = []
        for x in nodes[start:stop]:
            product = shift_samples(f.values, 0.5 * x, line.spacing) * np.conj(
                shift_samples(g.values, -0.5 * x, line.spacing)
            )
            rows.append(line.spacing * (product @ modulation))
        return np.array(rows)

    values = chunked_map(chunk, len(nodes), 32, workers)
    return PhaseFunction(grid, values)


def wigner(
    f: WaveFunction, g: WaveFunction, grid: PhaseGrid, workers: int | None = None
) -> PhaseFunction:
    """``W(f, g) = F_sigma(A(f, g))`` sampled on ``grid``.

    ``A`` is sampled on ``grid.dual()`` so the transform lands on ``grid``.
    """

    amb = ambiguity_on_grid(f, g, grid.dual(), workers)
    result = PhaseFunction(grid, symplectic_fourier(amb).values)
    ring = amb.boundary_ratio() * float(np.abs(amb.values).max())
    if ring > BOUNDARY_TOL:
        logger.warning("ambiguity samples reach %.3g on the grid boundary", ring)
        result = result.flagged("boundary-decay")
    return result


def shifted_gaussian(z0: PhasePoint, grid: LineGrid) -> WaveFunction:
    """``rho(z0) g_0`` sampled on ``grid``."""

    if abs(z0.x) > grid.half_width / 2.0:
        raise GridSizingError(
            f"shift |x0| = {abs(z0.x)} exceeds half the line half-width ({grid.half_width / 2})"
        )
    t = grid.nodes
    values = (
        np.exp(-1j * np.pi * z0.x * z0.xi)
        * np.exp(2j * np.pi * t * z0.xi)
        * 2.0**0.25
        * np.exp(-np.pi * (t - z0.x) ** 2)
    )
    return WaveFunction(grid, values)


def _alphas(points: np.ndarray) -> np.ndarray:
    return math.sqrt(math.pi) * (points[:, 0] + 1j * points[:, 1])


def _bands(alpha: np.ndarray, n: int, offsets: int) -> np.ndarray:
    """Real band values ``r[:, k, j]`` with ``<j + k| D(alpha) |j> = r e^{i k arg(alpha)}``.

    Normalized Laguerre recurrence along each band; every value is a matrix entry of a
    unitary, so nothing leaves ``[-1, 1]``.
    """

    x = (np.abs(alpha) ** 2)[:, None]
    log_abs = np.log(np.maximum(np.abs(alpha), np.finfo(float).tiny))[:, None]
    k = np.arange(offsets, dtype=float)[None, :]
    out = np.empty((len(alpha), offsets, n))
    prev = np.exp(-0.5 * x + k * log_abs - 0.5 * special.gammaln(k + 1.0))
    out[:, :, 0] = prev
    if n == 1:
        return out
    cur = prev * (1.0 + k - x) / np.sqrt(k + 1.0)
    out[:, :, 1] = cur
    for j in range(1, n - 1):
        nxt = ((2.0 * j + 1.0 + k - x) * cur - np.sqrt(j * (j + k)) * prev) / np.sqrt(
            (j + 1.0) * (j + 1.0 + k)
        )
        out[:, :, j + 1] = nxt
        prev, cur = cur, nxt
    return out


def _unit_phase(alpha: np.ndarray) -> np.ndarray:
    mag = np.abs(alpha)
    return np.where(mag > 0, alpha / np.where(mag > 0, mag, 1.0), 1.0)


def rho_matrices(points: Sequence[PhasePoint] | np.ndarray, n: int) -> np.ndarray:
    """Stacked ``N x N`` matrices of ``rho(z)`` in the Hermite basis, shape ``(K, N, N)``."""

    if n < 1:
        raise ValueError(f"basis size must be >= 1, got {n}")
    pts = as_points(points)
    alpha = _alphas(pts)
    bands = _bands(alpha, n, n)
    rows, cols = np.indices((n, n))
    offset = np.abs(rows - cols)
    start = np.minimum(rows, cols)
    powers = np.arange(n)
    phase = _unit_phase(alpha)[:, None]
    below = phase**powers
    above = (-np.conj(phase)) ** powers
    out = bands[:, offset, start] * np.where(rows >= cols, below[:, offset], above[:, offset])
    far = np.flatnonzero(np.abs(alpha) ** 2 > RECURRENCE_MAX_ABS2)
    for idx in far:
        a = complex(alpha[idx])
        out[idx] = [[displacement_element(r, c, a) for c in range(n)] for r in range(n)]
    return out


def rho_diagonals(points: Sequence[PhasePoint] | np.ndarray, n: int) -> np.ndarray:
    """Diagonals ``<m| rho(z) |m>`` for ``m < N``, shape ``(K, N)``; real by symmetry."""

    if n < 1:
        raise ValueError(f"basis size must be >= 1, got {n}")
    alpha = _alphas(as_points(points))
    out = _bands(alpha, n, 1)[:, 0, :]
    for idx in np.flatnonzero(np.abs(alpha) ** 2 > RECURRENCE_MAX_ABS2):
        a = complex(alpha[idx])
        out[idx] = [displacement_element(m, m, a).real for m in range(n)]
    return out


def displacement_matrix(z: PhasePoint, n: int) -> np.ndarray:
    return rho_matrices([z], n)[0]


def rho_matrix(z: PhasePoint, basis: HermiteBasis) -> OperatorMatrix:
    from .operator_calculus import OperatorMatrix

    return OperatorMatrix(displacement_matrix(z, basis.size), basis.fingerprint)


@dataclass(frozen=True)
class ProjectiveCheck:
    scalar: complex
    deviation: float
    expected_phase: float

    @property
    def phase(self) -> float:
        return math.atan2(self.scalar.imag, self.scalar.real)


def projective_phase(z: PhasePoint, w: PhasePoint, n: int) -> ProjectiveCheck:
    """Fit ``rho(z) rho(w) = c rho(z + w)`` on the top-left ``N/2`` block."""

    block = max(1, n // 2)
    product = (displacement_matrix(z, n) @ displacement_matrix(w, n))[:block, :block]
    target = displacement_matrix(z + w, n)[:block, :block]
    scalar = complex(np.vdot(target, product) / np.vdot(target, target))
    deviation = float(np.max(np.abs(product - scalar * target)))
    return ProjectiveCheck(scalar, deviation, math.pi * symplectic_form(z, w))


@dataclass(frozen=True)
class GateReport:
    max_error: float
    points: int
    size: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def validate_ambiguity_closed_form(
    n: int = 64,
    radius: float = 4.0,
    samples: int = 16,
    tolerance: float = 1e-8,
    seed: int = 0,
    raise_on_failure: bool = True,
) -> GateReport:
    """Compare the closed form of ``A(h_m, h_n)`` against quadrature on random points."""

    half_width, points = GATE_GRID
    half_width = max(half_width, sizing_rule(n)[0])
    grid = LineGrid(half_width, max(points, 8 * math.ceil(half_width**2)))
    basis = hermite_basis(n, grid)
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=samples))
    theta = 2.0 * np.pi * rng.uniform(size=samples)
    pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    closed = np.conj(rho_matrices(pts, n))
    worst = 0.0
    for k, (x, xi) in enumerate(pts):
        quad = ambiguity_matrix(basis, PhasePoint(float(x), float(xi)))
        worst = max(worst, float(np.max(np.abs(quad - closed[k]))))
    report = GateReport(worst, samples, n, tolerance)
    if report.passed:
        logger.info("ambiguity closed form validated: max error %.3g (%d points)", worst, samples)
    elif raise_on_failure:
        raise ValidationGateError(
            f"closed-form ambiguity disagrees with quadrature: max error {worst:.3g} > {tolerance}"
        )
    else:
        logger.warning("ambiguity validation failed: max error %.3g", worst)
    return report
