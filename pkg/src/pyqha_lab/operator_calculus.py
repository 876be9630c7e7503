"""Truncated-operator algebra in the Hermite basis.

Operators are dense ``N x N`` matrices acting on Hermite coefficient vectors.  The
fingerprint ties a matrix to the basis it was built from; an empty fingerprint marks
a matrix that is not bound to a basis and composes with anything.
"""

from __future__ import annotations

import logging
import math
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import linalg, signal

from .errors import FingerprintMismatchError
from .hermite_rep import HermiteBasis, WaveFunction, coefficients, rho_matrices
from .parallel import chunk_bounds, chunked_map
from .phase_space import PhaseFunction, PhaseGrid, PhasePoint, as_points, symplectic_fourier

logger = logging.getLogger(__name__)

SELF_ADJOINT_TOL = 1e-12
DECAY_TOL = 1e-10
PRUNE_TOL = 1e-16
RHO_CHUNK_ENTRIES = 2**18
TARGET_CHUNK = 64


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    fingerprint: str = ""
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise ValueError(f"operator entries must be a non-empty square matrix: {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, basis: HermiteBasis | int) -> OperatorMatrix:
        n, fingerprint = size_and_fingerprint(basis)
        return cls(np.eye(n, dtype=complex), fingerprint)

    def bound_fingerprint(self, other: OperatorMatrix) -> str:
        if self.dim != other.dim:
            raise ValueError(f"operator dimensions differ: {self.dim} vs {other.dim}")
        if self.fingerprint and other.fingerprint and self.fingerprint != other.fingerprint:
            raise FingerprintMismatchError(
                f"basis fingerprints differ: {self.fingerprint} vs {other.fingerprint}"
            )
        return self.fingerprint or other.fingerprint

    def adjoint(self) -> OperatorMatrix:
        return replace(self, entries=self.entries.conj().T)

    def __matmul__(self, other: OperatorMatrix) -> OperatorMatrix:
        return OperatorMatrix(self.entries @ other.entries, self.bound_fingerprint(other))

    def __add__(self, other: OperatorMatrix) -> OperatorMatrix:
        return OperatorMatrix(self.entries + other.entries, self.bound_fingerprint(other))

    def __sub__(self, other: OperatorMatrix) -> OperatorMatrix:
        return OperatorMatrix(self.entries - other.entries, self.bound_fingerprint(other))

    def scaled(self, factor: complex) -> OperatorMatrix:
        return replace(self, entries=factor * self.entries)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(coeffs, dtype=complex)

    def is_self_adjoint(self, tol: float = SELF_ADJOINT_TOL) -> bool:
        norm = self.hs_norm()
        if norm == 0.0:
            return True
        return float(np.linalg.norm(self.entries - self.entries.conj().T)) / norm < tol

    def flagged(self, flag: str) -> OperatorMatrix:
        if flag in self.flags:
            return self
        return replace(self, flags=(*self.flags, flag))


def size_and_fingerprint(basis: HermiteBasis | int) -> tuple[int, str]:
    if isinstance(basis, HermiteBasis):
        return basis.size, basis.fingerprint
    if basis < 1:
        raise ValueError(f"basis size must be >= 1, got {basis}")
    return int(basis), ""


def _check_basis(op: OperatorMatrix, basis: HermiteBasis | None) -> None:
    if basis is None:
        return
    if op.dim != basis.size:
        raise ValueError(f"operator dimension {op.dim} does not match basis size {basis.size}")
    if op.fingerprint and op.fingerprint != basis.fingerprint:
        raise FingerprintMismatchError(
            f"operator fingerprint {op.fingerprint} does not match basis {basis.fingerprint}"
        )


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    values: np.ndarray
    source_dim: int

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) > self.source_dim:
            raise ValueError(f"spectrum must be a vector of length <= {self.source_dim}")
        if np.any(values < 0) or np.any(np.diff(values) > 0):
            raise ValueError("singular values must be non-negative and non-increasing")
        object.__setattr__(self, "values", values)

    def norm(self, p: float) -> float:
        return _lp(self.values, p)


def _lp(values: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(values[0]) if len(values) else 0.0
    if p < 1:
        raise ValueError(f"Schatten exponent must be >= 1 or inf, got {p}")
    top = float(values[0]) if len(values) else 0.0
    if top == 0.0:
        return 0.0
    return top * float(np.sum((values / top) ** p) ** (1.0 / p))


def singular_spectrum(op: OperatorMatrix) -> SingularSpectrum:
    if op.is_self_adjoint():
        mags = np.abs(linalg.eigvalsh(op.entries))
    else:
        mags = linalg.svdvals(op.entries)
    return SingularSpectrum(np.sort(mags)[::-1], op.dim)


def schatten_norm(op: OperatorMatrix, p: float) -> float:
    if not (p >= 1 or math.isinf(p)):
        raise ValueError(f"Schatten exponent must be >= 1 or inf, got {p}")
    return singular_spectrum(op).norm(p)


def parity(basis: HermiteBasis | int) -> OperatorMatrix:
    """Hermite-basis matrix of ``Pf(t) = f(-t)``: ``diag((-1)^n)``."""

    n, fingerprint = size_and_fingerprint(basis)
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return OperatorMatrix(np.diag(signs).astype(complex), fingerprint)


def _parity_conjugate(entries: np.ndarray) -> np.ndarray:
    n = entries.shape[0]
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return entries * np.outer(signs, signs)


def rank_one(f: WaveFunction, g: WaveFunction, basis: HermiteBasis) -> OperatorMatrix:
    """``(f (x) g) u = <u, g> f``."""

    cf = coefficients(f, basis)
    cg = coefficients(g, basis)
    return OperatorMatrix(np.outer(cf, np.conj(cg)), basis.fingerprint)


def fourier_wigner(
    op: OperatorMatrix,
    targets: Sequence[PhasePoint] | np.ndarray,
    basis: HermiteBasis | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """``F_W(T)(z) = tr(T rho(-z))`` at each target."""

    _check_basis(op, basis)
    pts = as_points(targets)
    if len(pts) == 0:
        return np.empty(0, dtype=complex)
    entries = op.entries

    def chunk(start: int, stop: int) -> np.ndarray:
        mats = rho_matrices(-pts[start:stop], op.dim)
        return np.einsum("mn,knm->k", entries, mats)

    return chunked_map(chunk, len(pts), TARGET_CHUNK, workers)


class RhoCache:
    """LRU cache of ``rho`` matrices for fixed chunks of grid nodes.

    Entries are keyed by ``(grid, N, chunk index)``; a chunk always holds the same
    nodes, so a hit returns exactly what a recomputation would.
    """

    def __init__(self, capacity: int | None = None) -> None:
        if capacity is None:
            capacity = int(os.environ.get("QHA_RHO_CACHE_ENTRIES", "64"))
        self.capacity = max(0, capacity)
        self._entries: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self.hits = 0
            self.misses = 0

    def get(self, grid: PhaseGrid, n: int, index: int, nodes: np.ndarray) -> np.ndarray:
        key = (grid.key, n, index)
        with self._lock:
            cached = self._entries.get(key)
            if cached is not None:
                self._entries.move_to_end(key)
                self.hits += 1
                return cached
            self.misses += 1
        mats = rho_matrices(nodes, n)
        mats.setflags(write=False)
        if self.capacity:
            with self._lock:
                self._entries[key] = mats
                self._entries.move_to_end(key)
                while len(self._entries) > self.capacity:
                    self._entries.popitem(last=False)
        return mats


RHO_CACHE = RhoCache()


def rho_chunk_size(n: int) -> int:
    return max(1, RHO_CHUNK_ENTRIES // (n * n))


def _leading_support(entries: np.ndarray) -> int:
    """Smallest ``k`` with ``entries`` supported on the leading ``k x k`` block."""

    used = np.flatnonzero(np.any(entries != 0, axis=0) | np.any(entries != 0, axis=1))
    return int(used[-1]) + 1 if used.size else 1


def _sandwich_traces(s_entries: np.ndarray, block: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """``tr(S rho_k B rho_k^*)`` for each ``rho_k``, with ``B`` on the leading block."""

    k = block.shape[0]
    cols = mats[:, :, :k]
    sandwiched = np.conj(np.swapaxes(cols, 1, 2)) @ s_entries @ cols
    return np.einsum("kab,ba->k", sandwiched, block)


def conv_op_op(
    s: OperatorMatrix,
    t: OperatorMatrix,
    targets: Sequence[PhasePoint] | np.ndarray,
    workers: int | None = None,
) -> np.ndarray:
    """``(S * T)(z) = tr(S rho(z) P T P rho(-z))`` at each target."""

    s.bound_fingerprint(t)
    pts = as_points(targets)
    if len(pts) == 0:
        return np.empty(0, dtype=complex)
    ptp = _parity_conjugate(t.entries)
    k = _leading_support(ptp)
    block = ptp[:k, :k]

    def chunk(start: int, stop: int) -> np.ndarray:
        return _sandwich_traces(s.entries, block, rho_matrices(pts[start:stop], s.dim))

    return chunked_map(chunk, len(pts), TARGET_CHUNK, workers)


def grid_conv_op_ops(
    s: OperatorMatrix,
    ts: Sequence[OperatorMatrix],
    grid: PhaseGrid,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> list[PhaseFunction]:
    """``S * T`` on every node of ``grid`` for each ``T``, in one pass over cached ``rho``."""

    if not ts:
        return []
    for t in ts:
        s.bound_fingerprint(t)
    cache = RHO_CACHE if cache is None else cache
    ptps = [_parity_conjugate(t.entries) for t in ts]
    k = max(_leading_support(ptp) for ptp in ptps)
    blocks = np.stack([ptp[:k, :k] for ptp in ptps])
    nodes = grid.points()
    size = rho_chunk_size(s.dim)
    bounds = chunk_bounds(len(nodes), size)

    def run(lo: int, hi: int) -> np.ndarray:
        parts = []
        for start, stop in bounds[lo:hi]:
            cols = cache.get(grid, s.dim, start // size, nodes[start:stop])[:, :, :k]
            sandwiched = np.conj(np.swapaxes(cols, 1, 2)) @ s.entries @ cols
            parts.append(np.einsum("kab,tba->kt", sandwiched, blocks))
        return np.concatenate(parts)

    values = chunked_map(run, len(bounds), 1, workers)
    m = grid.points_per_axis
    return [PhaseFunction(grid, values[:, j].reshape(m, m)) for j in range(len(ts))]


def grid_conv_op_op(
    s: OperatorMatrix,
    t: OperatorMatrix,
    grid: PhaseGrid,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> PhaseFunction:
    return grid_conv_op_ops(s, [t], grid, workers, cache)[0]


def _grid_chunks(weights: np.ndarray, n: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    flat = weights.reshape(weights.shape[0], -1)
    peak = float(np.abs(flat).max()) if flat.size else 0.0
    if peak > 0:
        keep = np.any(np.abs(flat) > PRUNE_TOL * peak, axis=0)
    else:
        keep = np.zeros(flat.shape[1], dtype=bool)
    bounds = [
        (start, stop)
        for start, stop in chunk_bounds(flat.shape[1], rho_chunk_size(n))
        if keep[start:stop].any()
    ]
    return np.where(keep[None, :], flat, 0.0), bounds


def _grid_operator_sum(
    weights: np.ndarray,
    grid: PhaseGrid,
    n: int,
    inner: np.ndarray | None,
    workers: int | None,
    cache: RhoCache | None,
) -> np.ndarray:
    """``sum_k w_k rho(z_k)`` or, given ``inner``, ``sum_k w_k rho(z_k) S rho(z_k)^*``.

    ``weights`` is ``(M, M)`` or a stack ``(s, M, M)``; the result follows suit.
    """

    stacked = weights.ndim == 3
    flat, bounds = _grid_chunks(weights if stacked else weights[None], n)
    cache = RHO_CACHE if cache is None else cache
    nodes = grid.points()
    size = rho_chunk_size(n)
    logger.debug("grid operator sum: %d of %d chunks active", len(bounds), -(-len(nodes) // size))
    if not bounds:
        empty = np.zeros((flat.shape[0], n, n), dtype=complex)
        return empty if stacked else empty[0]
    k = n if inner is None else _leading_support(inner)
    block = None if inner is None else inner[:k, :k]

    def run(lo: int, hi: int) -> np.ndarray:
        partials = []
        for start, stop in bounds[lo:hi]:
            mats = cache.get(grid, n, start // size, nodes[start:stop])
            w = flat[:, start:stop]
            if block is None:
                partials.append(np.einsum("sk,kmn->smn", w, mats))
            else:
                cols = mats[:, :, :k]
                conjugated = cols @ block @ np.conj(np.swapaxes(cols, 1, 2))
                partials.append(np.einsum("sk,kmn->smn", w, conjugated))
        return np.array(partials)

    total = np.sum(chunked_map(run, len(bounds), 1, workers), axis=0)
    return total if stacked else total[0]


def integrate_rho(
    function: PhaseFunction,
    basis: HermiteBasis | int,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> OperatorMatrix:
    """Grid quadrature of ``int F(z) rho(z) dz``."""

    n, fingerprint = size_and_fingerprint(basis)
    weights = function.grid.cell_area * function.values
    entries = _grid_operator_sum(weights, function.grid, n, None, workers, cache)
    return OperatorMatrix(entries, fingerprint)


def _decay_flagged(op: OperatorMatrix, function: PhaseFunction, what: str) -> OperatorMatrix:
    ring = function.boundary_ratio() * float(np.abs(function.values).max())
    if ring > DECAY_TOL:
        logger.warning("%s reaches %.3g on the grid boundary", what, ring)
        return op.flagged("boundary-decay")
    return op


def conv_fun_op(
    function: PhaseFunction,
    op: OperatorMatrix,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> OperatorMatrix:
    """``F * S = int F(z) rho(z) S rho(-z) dz`` by grid quadrature."""

    weights = function.grid.cell_area * function.values
    entries = _grid_operator_sum(weights, function.grid, op.dim, op.entries, workers, cache)
    result = OperatorMatrix(entries, op.fingerprint)
    return _decay_flagged(result, function, "function")


def conv_fun_fun(f: PhaseFunction, g: PhaseFunction) -> PhaseFunction:
    """``(F * G)(z) = int F(w) G(z - w) dw`` on the grid of ``f``."""

    if f.grid != g.grid:
        raise ValueError(f"functions live on different grids: {f.grid} vs {g.grid}")
    m = f.grid.points_per_axis
    full = signal.fftconvolve(f.values, g.values, mode="full")
    half = m // 2
    return PhaseFunction(f.grid, f.grid.cell_area * full[half : half + m, half : half + m])


def _tau_transform(symbol: PhaseFunction, tau: float | None) -> PhaseFunction:
    transformed = symplectic_fourier(symbol)
    if tau is None:
        return transformed
    x, xi = transformed.grid.mesh()
    return transformed.with_values(
        transformed.values * np.exp(-1j * np.pi * (2.0 * tau - 1.0) * x * xi)
    )


def _quantize(
    symbol: PhaseFunction,
    basis: HermiteBasis,
    tau: float | None,
    workers: int | None,
    cache: RhoCache | None,
) -> OperatorMatrix:
    transformed = _tau_transform(symbol, tau)
    result = integrate_rho(transformed, basis, workers, cache)
    return _decay_flagged(result, transformed, "symplectic transform of the symbol")


def weyl_quantize(
    symbol: PhaseFunction,
    basis: HermiteBasis,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> OperatorMatrix:
    """``L_a = int F_sigma(a)(z) rho(z) dz``."""

    return _quantize(symbol, basis, None, workers, cache)


def weyl_quantize_many(
    symbols: Sequence[PhaseFunction],
    basis: HermiteBasis,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> list[OperatorMatrix]:
    """Weyl quantization of symbols sharing one grid, in a single pass over ``rho``."""

    if not symbols:
        return []
    grid = symbols[0].grid
    if any(symbol.grid != grid for symbol in symbols):
        raise ValueError("symbols must share one grid")
    transformed = [_tau_transform(symbol, None) for symbol in symbols]
    dual = transformed[0].grid
    weights = dual.cell_area * np.stack([t.values for t in transformed])
    entries = _grid_operator_sum(weights, dual, basis.size, None, workers, cache)
    return [
        _decay_flagged(OperatorMatrix(e, basis.fingerprint), t, "symplectic transform")
        for e, t in zip(entries, transformed)
    ]


def tau_quantize(
    symbol: PhaseFunction,
    tau: float,
    basis: HermiteBasis,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> OperatorMatrix:
    """``L^tau_a = int exp(-pi i (2 tau - 1) x xi) F_sigma(a)(x, xi) rho(x, xi) d(x, xi)``."""

    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    return _quantize(symbol, basis, None if tau == 0.5 else tau, workers, cache)


def localization(
    symbol: PhaseFunction,
    phi: WaveFunction,
    psi: WaveFunction,
    basis: HermiteBasis,
    workers: int | None = None,
    cache: RhoCache | None = None,
) -> OperatorMatrix:
    """``A_a^{phi,psi} = a * (psi (x) phi)``."""

    return conv_fun_op(symbol, rank_one(psi, phi, basis), workers, cache)
