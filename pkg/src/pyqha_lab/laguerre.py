"""Scaled Laguerre recurrences.

Values are carried either with the Gaussian factor ``e^{-x/2}`` folded in
(``laguerre_functions``) or as a mantissa plus a running log-scale
(``genlaguerre_log``) so that large orders neither overflow nor underflow.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without the accel extra
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


RESCALE_AT = 1e150


@njit(cache=True)
def _laguerre_functions(n_max, x):
    out = np.empty(n_max)
    prev = math.exp(-0.5 * x)
    out[0] = prev
    if n_max == 1:
        return out
    cur = prev * (1.0 - x)
    out[1] = cur
    for n in range(1, n_max - 1):
        nxt = ((2.0 * n + 1.0 - x) * cur - n * prev) / (n + 1.0)
        out[n + 1] = nxt
        prev = cur
        cur = nxt
    return out


@njit(cache=True)
def _genlaguerre_log(n, k, x):
    prev = 1.0
    log_scale = 0.0
    if n == 0:
        return prev, log_scale
    cur = 1.0 + k - x
    for j in range(1, n):
        nxt = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0)
        prev = cur
        cur = nxt
        if abs(cur) > RESCALE_AT:
            cur /= RESCALE_AT
            prev /= RESCALE_AT
            log_scale += math.log(RESCALE_AT)
    return cur, log_scale


def laguerre_functions(n_max: int, x: float) -> np.ndarray:
    """Return ``e^{-x/2} L_n(x)`` for ``n = 0 .. n_max - 1``."""

    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    return _laguerre_functions(int(n_max), float(x))


def genlaguerre_log(n: int, k: int, x: float) -> tuple[float, float]:
    """Return ``(mantissa, log_scale)`` with ``L_n^{(k)}(x) = mantissa * exp(log_scale)``."""

    if n < 0 or k < 0:
        raise ValueError(f"order and parameter must be non-negative, got n={n}, k={k}")
    mantissa, log_scale = _genlaguerre_log(int(n), int(k), float(x))
    return float(mantissa), float(log_scale)


def displacement_element(m: int, n: int, alpha: complex) -> complex:
    """Closed form of ``<m|D(alpha)|n>`` for the harmonic-oscillator displacement."""

    r2 = abs(alpha) ** 2
    if r2 == 0.0:
        return 1.0 + 0.0j if m == n else 0.0j

    if m >= n:
        lo, k, base = n, m - n, alpha
    else:
        lo, k, base = m, n - m, -alpha.conjugate()

    mantissa, log_scale = genlaguerre_log(lo, k, r2)
    if mantissa == 0.0:
        return 0.0j
    log_mag = (
        0.5 * (math.lgamma(lo + 1) - math.lgamma(lo + k + 1))
        + k * math.log(abs(base))
        - 0.5 * r2
        + log_scale
        + math.log(abs(mantissa))
    )
    phase = (base / abs(base)) ** k
    return math.copysign(1.0, mantissa) * math.exp(log_mag) * phase
