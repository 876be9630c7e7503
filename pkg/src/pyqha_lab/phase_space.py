"""Phase-space geometry on R^2 (d = 1) and the symplectic Fourier transform.

Convention: 2*pi in the exponent, no prefactors.  ``F_sigma(F)(zeta) =
int F(z) exp(-2 pi i sigma(zeta, z)) dz`` with ``sigma((x, xi), (y, eta)) =
y*xi - x*eta``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import fft as sfft

from .errors import GridSizingError, MeasureSpecError
from .parallel import chunked_map

logger = logging.getLogger(__name__)

DIMENSION = 1
TARGET_CHUNK = 512
MEASURE_KINDS = ("dirac", "atom-list", "circle", "cantor", "reweighted")


@dataclass(frozen=True)
class PhasePoint:
    x: float
    xi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.xi)):
            raise ValueError(f"PhasePoint components must be finite, got ({self.x}, {self.xi})")

    @classmethod
    def origin(cls) -> PhasePoint:
        return cls(0.0, 0.0)

    def __add__(self, other: PhasePoint) -> PhasePoint:
        return PhasePoint(self.x + other.x, self.xi + other.xi)

    def __sub__(self, other: PhasePoint) -> PhasePoint:
        return PhasePoint(self.x - other.x, self.xi - other.xi)

    def __neg__(self) -> PhasePoint:
        return PhasePoint(-self.x, -self.xi)

    def scaled(self, factor: float) -> PhasePoint:
        return PhasePoint(factor * self.x, factor * self.xi)

    def norm(self) -> float:
        return math.hypot(self.x, self.xi)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.xi], dtype=float)


def as_points(targets: Sequence[PhasePoint] | np.ndarray) -> np.ndarray:
    """Normalize a target list into a float array of shape ``(K, 2)``."""

    if isinstance(targets, np.ndarray):
        arr = np.asarray(targets, dtype=float)
        if arr.size == 0:
            return np.empty((0, 2))
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"point arrays must have shape (K, 2), got {arr.shape}")
        return arr
    if isinstance(targets, PhasePoint):
        return targets.as_array()[None, :]
    if len(targets) == 0:
        return np.empty((0, 2))
    return np.array([[p.x, p.xi] for p in targets], dtype=float)


def symplectic_form(z: PhasePoint, w: PhasePoint) -> float:
    return w.x * z.xi - z.x * w.xi


def symplectic_form_array(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Broadcasting ``sigma`` over trailing coordinate axes of length 2."""

    return w[..., 0] * z[..., 1] - z[..., 0] * w[..., 1]


@dataclass(frozen=True)
class PhaseGrid:
    """Centered, endpoint-exclusive square grid with ``M`` nodes per axis."""

    half_width: float
    points_per_axis: int

    def __post_init__(self) -> None:
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise GridSizingError(f"half_width must be positive, got {self.half_width}")
        if self.points_per_axis < 2 or self.points_per_axis % 2:
            raise GridSizingError(
                f"points_per_axis must be an even positive integer, got {self.points_per_axis}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def nodes(self) -> np.ndarray:
        m = self.points_per_axis
        return self.spacing * (np.arange(m) - m // 2)

    @property
    def key(self) -> tuple[float, int]:
        return (float(self.half_width), int(self.points_per_axis))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")

    def points(self) -> np.ndarray:
        x, xi = self.mesh()
        return np.stack([x.ravel(), xi.ravel()], axis=1)

    def dual(self) -> PhaseGrid:
        """Grid of the discrete transform: spacing 1/(2L), half-width 1/(2h)."""

        return PhaseGrid(1.0 / (2.0 * self.spacing), self.points_per_axis)

    def is_self_dual(self) -> bool:
        return math.isclose(self.spacing, 1.0 / (2.0 * self.half_width), rel_tol=1e-12)


@dataclass(frozen=True, eq=False)
class PhaseFunction:
    grid: PhaseGrid
    values: np.ndarray
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        m = self.grid.points_per_axis
        if values.shape != (m, m):
            raise ValueError(f"values must have shape ({m}, {m}), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("PhaseFunction values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(
        cls, grid: PhaseGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> PhaseFunction:
        x, xi = grid.mesh()
        return cls(grid, np.asarray(fn(x, xi), dtype=complex) * np.ones_like(x))

    def with_values(self, values: np.ndarray, flags: tuple[str, ...] = ()) -> PhaseFunction:
        return PhaseFunction(self.grid, values, flags)

    def flagged(self, flag: str) -> PhaseFunction:
        if flag in self.flags:
            return self
        return replace(self, flags=(*self.flags, flag))

    def l2_norm(self) -> float:
        return float(math.sqrt(self.grid.cell_area * np.sum(np.abs(self.values) ** 2)))

    def integral(self) -> complex:
        return complex(self.grid.cell_area * np.sum(self.values))

    def boundary_ratio(self) -> float:
        """Largest modulus on the outer ring of nodes relative to the global maximum."""

        mags = np.abs(self.values)
        peak = mags.max()
        if peak == 0.0:
            return 0.0
        ring = max(mags[0, :].max(), mags[-1, :].max(), mags[:, 0].max(), mags[:, -1].max())
        return float(ring / peak)


def grid_lp_norm(function: PhaseFunction, p: float) -> float:
    mags = np.abs(function.values)
    if math.isinf(p):
        return float(mags.max())
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    return float((function.grid.cell_area * np.sum(mags**p)) ** (1.0 / p))


def fourier_transform_2d(function: PhaseFunction) -> PhaseFunction:
    """Plain 2D transform ``int F(z) e^{-2 pi i z.omega} dz`` sampled on the dual grid."""

    grid = function.grid
    shifted = sfft.ifftshift(function.values)
    values = grid.cell_area * sfft.fftshift(sfft.fft2(shifted))
    return PhaseFunction(grid.dual(), values)


def _negated_index(m: int) -> np.ndarray:
    return (-np.arange(m)) % m


def symplectic_fourier(function: PhaseFunction) -> PhaseFunction:
    """Symplectic Fourier transform ``F_sigma(F)(zeta) = F(F)(J zeta)``.

    The result lives on ``function.grid.dual()``; it is the input grid when
    ``M = 4 L^2``. Applying the transform twice returns to the input grid.
    """

    m = function.grid.points_per_axis
    if m < 4:
        raise GridSizingError(f"symplectic_fourier needs at least 4 points per axis, got {m}")
    plain = fourier_transform_2d(function)
    # (x, xi) -> (xi, -x): row index becomes the negated column index.
    rotated = plain.values.T[_negated_index(m), :]
    return PhaseFunction(plain.grid, rotated)


def nonuniform_symplectic_fourier(
    function: PhaseFunction,
    targets: Sequence[PhasePoint] | np.ndarray,
    workers: int | None = None,
) -> np.ndarray:
    """Direct grid quadrature of ``F_sigma(F)`` at arbitrary points."""

    pts = as_points(targets)
    if len(pts) == 0:
        return np.empty(0, dtype=complex)
    nodes = function.grid.points()
    vals = function.values.ravel() * function.grid.cell_area

    def chunk(start: int, stop: int) -> np.ndarray:
        phase = symplectic_form_array(pts[start:stop, None, :], nodes[None, :, :])
        return np.sum(np.exp(-2j * np.pi * phase) * vals[None, :], axis=1)

    return chunked_map(chunk, len(pts), max(1, TARGET_CHUNK // 8), workers)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite weighted atom list standing in for a compactly supported Radon measure."""

    atoms: np.ndarray
    weights: np.ndarray
    kind: str = "atom-list"
    center: PhasePoint = field(default_factory=PhasePoint.origin)
    radius_bound: float = 0.0

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=float).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=complex).ravel()
        if len(atoms) < 1 or len(atoms) != len(weights):
            raise MeasureSpecError(
                f"atoms and weights must have equal length >= 1, got {len(atoms)} and "
                f"{len(weights)}"
            )
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(weights))):
            raise MeasureSpecError("atoms and weights must be finite")
        if self.kind not in MEASURE_KINDS:
            raise MeasureSpecError(f"Unknown measure kind {self.kind!r}; expected {MEASURE_KINDS}")
        total = float(np.sum(np.abs(weights)))
        if not total > 0:
            raise MeasureSpecError("total variation must be positive")
        reach = float(np.max(np.hypot(*(atoms - self.center.as_array()).T)))
        if self.radius_bound < reach * (1.0 - 1e-12):
            raise MeasureSpecError(
                f"radius_bound {self.radius_bound} is smaller than the atom reach {reach}"
            )
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def abs_weights(self) -> np.ndarray:
        return np.abs(self.weights)

    @property
    def total_variation(self) -> float:
        return float(np.sum(self.abs_weights))

    def atom_points(self) -> list[PhasePoint]:
        return [PhasePoint(float(x), float(xi)) for x, xi in self.atoms]


def measure_lq_norm(values: np.ndarray, mu: DiscreteMeasure, q: float) -> float:
    """``||G||_{L^q(|mu|)}`` for samples of ``G`` on the atoms."""

    mags = np.abs(np.asarray(values))
    if mags.shape != (mu.size,):
        raise ValueError(f"expected {mu.size} values, got shape {mags.shape}")
    if math.isinf(q):
        support = mu.abs_weights > 0
        return float(mags[support].max())
    return float(np.sum(mu.abs_weights * mags**q) ** (1.0 / q))


def fourier_of_atoms(
    atoms: np.ndarray,
    weights: np.ndarray,
    targets: Sequence[PhasePoint] | np.ndarray,
    workers: int | None = None,
) -> np.ndarray:
    """``sum_j w_j exp(-2 pi i sigma(zeta, z_j))`` at each target ``zeta``."""

    pts = as_points(targets)
    if len(pts) == 0:
        return np.empty(0, dtype=complex)
    atoms = as_points(np.asarray(atoms, dtype=float))
    weights = np.asarray(weights, dtype=complex)

    def chunk(start: int, stop: int) -> np.ndarray:
        phase = symplectic_form_array(pts[start:stop, None, :], atoms[None, :, :])
        return np.sum(np.exp(-2j * np.pi * phase) * weights[None, :], axis=1)

    return chunked_map(chunk, len(pts), TARGET_CHUNK, workers)


def fourier_of_measure(
    mu: DiscreteMeasure,
    targets: Sequence[PhasePoint] | np.ndarray,
    workers: int | None = None,
) -> np.ndarray:
    """``F_sigma(mu)(zeta) = sum_j w_j exp(-2 pi i sigma(zeta, z_j))`` at each target."""

    return fourier_of_atoms(mu.atoms, mu.weights, targets, workers)


def parseval_measures(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[complex, complex]:
    """Both sides of ``int F_sigma(mu) dnu = int F_sigma(nu)(-zeta) dmu(zeta)``."""

    lhs = np.sum(nu.weights * fourier_of_measure(mu, nu.atoms))
    rhs = np.sum(mu.weights * fourier_of_measure(nu, -mu.atoms))
    return complex(lhs), complex(rhs)


def _reach(atoms: np.ndarray, center: PhasePoint) -> float:
    return float(np.max(np.hypot(*(atoms - center.as_array()).T)))


def dirac(z0: PhasePoint | None = None, mass: complex = 1.0) -> DiscreteMeasure:
    center = z0 or PhasePoint.origin()
    return DiscreteMeasure(center.as_array()[None, :], [mass], "dirac", center, 0.0)


def atom_list(
    points: Sequence[PhasePoint] | np.ndarray,
    weights: Sequence[complex] | np.ndarray,
    center: PhasePoint | None = None,
) -> DiscreteMeasure:
    atoms = as_points(points)
    if len(atoms) == 0:
        raise MeasureSpecError("an atom list needs at least one atom")
    if center is None:
        lo, hi = atoms.min(axis=0), atoms.max(axis=0)
        mid = 0.5 * (lo + hi)
        center = PhasePoint(float(mid[0]), float(mid[1]))
    return DiscreteMeasure(atoms, weights, "atom-list", center, _reach(atoms, center))


def circle(
    radius: float,
    nodes: int = 256,
    mass: float = 1.0,
    center: PhasePoint | None = None,
) -> DiscreteMeasure:
    """Equispaced trapezoid quadrature of the uniform measure on a circle."""

    if not radius > 0:
        raise MeasureSpecError(f"circle radius must be positive, got {radius}")
    if not mass > 0:
        raise MeasureSpecError(f"circle mass must be positive, got {mass}")
    if nodes < 8:
        raise MeasureSpecError(f"circle needs at least 8 nodes, got {nodes}")
    center = center or PhasePoint.origin()
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    atoms = center.as_array() + radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    weights = np.full(nodes, mass / nodes)
    return DiscreteMeasure(atoms, weights, "circle", center, max(radius, _reach(atoms, center)))


def _cantor_centers(level: int, contraction: float) -> np.ndarray:
    starts = np.array([0.0])
    width = 1.0
    for _ in range(level):
        starts = np.concatenate([starts, starts + width * (1.0 - contraction)])
        width *= contraction
    return np.sort(starts + 0.5 * width)


def cantor(level: int, contraction: float = 1.0 / 3.0) -> DiscreteMeasure:
    """Product of two middle-interval Cantor iterates on [0, 1], equal weights."""

    if level < 0:
        raise MeasureSpecError(f"cantor level must be >= 0, got {level}")
    if not 0 < contraction < 0.5:
        raise MeasureSpecError(f"contraction must lie in (0, 1/2), got {contraction}")
    axis = _cantor_centers(level, contraction)
    x, xi = np.meshgrid(axis, axis, indexing="ij")
    atoms = np.stack([x.ravel(), xi.ravel()], axis=1)
    weights = np.full(len(atoms), 1.0 / len(atoms))
    center = PhasePoint(0.5, 0.5)
    return DiscreteMeasure(atoms, weights, "cantor", center, _reach(atoms, center))


def reweight(base: DiscreteMeasure, z0: PhasePoint) -> DiscreteMeasure:
    """``dnu = exp(-pi |z - z0|^2 / 2) dmu``."""

    shift = base.atoms - z0.as_array()
    factor = np.exp(-0.5 * np.pi * np.sum(shift**2, axis=1))
    atoms = base.atoms.copy()
    return DiscreteMeasure(atoms, base.weights * factor, "reweighted", z0, _reach(atoms, z0))


def _point_from(value: Any, name: str) -> PhasePoint:
    if value is None:
        return PhasePoint.origin()
    if isinstance(value, PhasePoint):
        return value
    if isinstance(value, Mapping):
        return PhasePoint(float(value["x"]), float(value["xi"]))
    try:
        x, xi = value
    except (TypeError, ValueError) as exc:
        raise MeasureSpecError(f"{name} must be a pair (x, xi), got {value!r}") from exc
    return PhasePoint(float(x), float(xi))


def build_measure(spec: Mapping[str, Any] | DiscreteMeasure) -> DiscreteMeasure:
    """Build a measure from a JSON-style description such as
    ``{"kind": "circle", "radius": 1.0, "nodes": 256, "mass": 1.0}``."""

    if isinstance(spec, DiscreteMeasure):
        return spec
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise MeasureSpecError(f"measure spec must be a mapping with a 'kind', got {spec!r}")

    kind = spec["kind"]
    allowed: dict[str, set[str]] = {
        "dirac": {"center", "mass"},
        "atoms": {"points", "weights", "center"},
        "atom-list": {"points", "weights", "center"},
        "circle": {"radius", "nodes", "mass", "center"},
        "cantor": {"level", "contraction"},
        "reweight": {"base", "center"},
        "reweighted": {"base", "center"},
    }
    if kind not in allowed:
        raise MeasureSpecError(f"Unknown measure kind {kind!r}; expected one of {sorted(allowed)}")
    extra = set(spec) - allowed[kind] - {"kind"}
    if extra:
        raise MeasureSpecError(f"Unexpected keys for {kind!r} measure: {sorted(extra)}")

    try:
        if kind == "dirac":
            return dirac(_point_from(spec.get("center"), "center"), spec.get("mass", 1.0))
        if kind in ("atoms", "atom-list"):
            points = [_point_from(p, "points") for p in spec["points"]]
            weights = [
                complex(*w) if isinstance(w, (list, tuple)) else complex(w)
                for w in spec["weights"]
            ]
            center = spec.get("center")
            return atom_list(
                points, weights, None if center is None else _point_from(center, "center")
            )
        if kind == "circle":
            return circle(
                float(spec["radius"]),
                int(spec.get("nodes", 256)),
                float(spec.get("mass", 1.0)),
                _point_from(spec.get("center"), "center"),
            )
        if kind == "cantor":
            return cantor(int(spec["level"]), float(spec.get("contraction", 1.0 / 3.0)))
        base = build_measure(spec["base"])
        return reweight(base, _point_from(spec.get("center"), "center"))
    except KeyError as exc:
        raise MeasureSpecError(f"{kind!r} measure spec is missing {exc.args[0]!r}") from exc


@dataclass(frozen=True)
class RegularityEstimate:
    alpha_hat: float | None
    beta_hat: float | None
    radii: tuple[float, ...]
    frequencies: tuple[float, ...]
    flags: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.alpha_hat is not None and self.beta_hat is not None

    def hambrook_laba_bound(self) -> float | None:
        """Necessary Lebesgue exponent: ``||F_sigma(mu)||_p = inf`` for ``p < 4d/alpha``."""

        if not self.alpha_hat:
            return None
        return 4.0 * DIMENSION / self.alpha_hat

    def corollary_bound(self) -> float | None:
        """Sufficient Schatten exponent ``p > 4d/beta`` from the decay hypothesis."""

        if not self.beta_hat:
            return None
        return 4.0 * DIMENSION / self.beta_hat


def _slope(log_x: np.ndarray, log_y: np.ndarray) -> float:
    slope, _ = np.polyfit(log_x, log_y, 1)
    return float(slope)


def regularity_estimates(
    mu: DiscreteMeasure,
    ray_count: int = 64,
    radius_samples: int = 11,
    seed: int = 0,
    *,
    radius_range: tuple[float, float] = (2.0**-6, 2.0**-1),
    frequency_range: tuple[float, float] = (4.0, 256.0),
    window_samples: int = 24,
    max_centers: int = 256,
    workers: int | None = None,
) -> RegularityEstimate:
    """Diagnostic fits of the ball-growth exponent alpha and the Fourier decay beta.

    ``alpha_hat``: slope of log mean ``|mu|(B(z_j, r))`` against log r over atom
    centered balls, r in ``radius_range * R``.  ``beta_hat``: ``-2`` times the slope
    of the log windowed sup of ``|F_sigma(mu)|`` over rays against ``log(1 + t)``.
    """

    rng = np.random.default_rng(seed)
    flags: list[str] = []
    if mu.size < 16:
        flags.append("few-atoms")

    scale = mu.radius_bound if mu.radius_bound > 0 else 1.0
    radii = scale * np.geomspace(radius_range[0], radius_range[1], radius_samples)
    n_centers = min(mu.size, max_centers)
    centers = mu.atoms[rng.choice(mu.size, size=n_centers, replace=False)]
    dist = np.hypot(*(centers[:, None, :] - mu.atoms[None, :, :]).transpose(2, 0, 1))
    masses = np.array(
        [np.mean(np.sum(np.where(dist <= r, mu.abs_weights[None, :], 0.0), axis=1)) for r in radii]
    )
    usable = masses > 0
    alpha_hat: float | None = None
    if np.count_nonzero(usable) >= 3:
        alpha_hat = _slope(np.log(radii[usable]), np.log(masses[usable]))
    else:
        flags.append("alpha-degenerate")
        logger.warning("alpha fit degenerate: %d usable scales", np.count_nonzero(usable))

    freqs = np.geomspace(frequency_range[0], frequency_range[1], radius_samples)
    offset = rng.uniform()
    angles = 2.0 * np.pi * (np.arange(ray_count) + offset) / ray_count
    window = np.geomspace(1.0, math.sqrt(2.0), window_samples)
    sups = np.empty(len(freqs))
    for k, t in enumerate(freqs):
        radial = t * window
        pts = np.stack(
            [
                (radial[:, None] * np.cos(angles)[None, :]).ravel(),
                (radial[:, None] * np.sin(angles)[None, :]).ravel(),
            ],
            axis=1,
        )
        sups[k] = np.abs(fourier_of_measure(mu, pts, workers)).max()
    usable_f = sups > 0
    beta_hat: float | None = None
    if np.count_nonzero(usable_f) >= 3:
        beta_hat = -2.0 * _slope(np.log1p(freqs[usable_f]), np.log(sups[usable_f]))
    else:
        flags.append("beta-degenerate")
        logger.warning("beta fit degenerate: %d usable scales", np.count_nonzero(usable_f))

    return RegularityEstimate(
        alpha_hat, beta_hat, tuple(map(float, radii)), tuple(map(float, freqs)), tuple(flags)
    )


def _smooth_step(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def reweight_constant(mu: DiscreteMeasure, points_per_axis: int = 256) -> float:
    """Young constant ``C`` with
    ``C^-1 ||F_sigma(nu)||_p <= ||F_sigma(mu)||_p <= C ||F_sigma(nu)||_p``
    for the Gaussian reweighting ``nu`` of ``mu`` about its center.

    One direction is convolution with ``2 exp(-2 pi |z|^2)`` (L^1 norm 1); the other
    uses the bump ``exp(pi |z - z0|^2 / 2)`` on ``B(z0, R)`` tapered to zero on
    ``B(z0, R + 1)``.
    """

    radius = mu.radius_bound
    grid = PhaseGrid(radius + 2.0, points_per_axis)
    x, xi = grid.mesh()
    r = np.hypot(x, xi)
    bump = np.exp(0.5 * np.pi * np.minimum(r, radius + 1.0) ** 2) * _smooth_step(radius + 1.0 - r)
    transformed = symplectic_fourier(PhaseFunction(grid, bump))
    return max(1.0, grid_lp_norm(transformed, 1.0))
