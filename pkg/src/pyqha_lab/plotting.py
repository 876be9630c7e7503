from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Literal

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import PlotError  # noqa: E402
from .operator_io import read_two_column_csv  # noqa: E402
from .restriction_lab import envelope_decay  # noqa: E402

logger = logging.getLogger(__name__)

PLOT_KINDS = ("loglog-spectrum", "ratio-curve")
MAX_MARKERS = 4096
STYLE = {
    "svg.hashsalt": "pyqha-lab",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "lines.linewidth": 1.2,
}


def fit_range(n: int) -> tuple[int, int]:
    lo = max(1, min(1000, n // 64))
    return lo, max(lo + 2, min(100_000, n))


def fitted_slope(values: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Envelope decay exponent of ``|values|`` over the default fit range."""

    lo, hi = fit_range(len(values))
    if hi > len(values):
        return math.nan, (lo, hi)
    return envelope_decay(np.abs(values), lo, hi), (lo, hi)


def marker_indices(n: int, limit: int = MAX_MARKERS) -> np.ndarray:
    """All indices when ``n <= limit``, otherwise a log-spaced subset keeping both ends."""

    if n <= limit:
        return np.arange(n)
    return np.unique(np.geomspace(1, n, limit).astype(int) - 1)


def _draw_spectrum(ax, header: list[str], table: np.ndarray) -> None:
    index, values = table[:, 0], table[:, 1]
    if not (np.abs(values) > 0).any():
        raise PlotError("spectrum has no non-zero values to plot on a log scale")
    slope, (lo, hi) = fitted_slope(values)
    shown = marker_indices(len(values))
    shown = shown[np.abs(values[shown]) > 0]
    ax.loglog(index[shown] + 1.0, np.abs(values[shown]), ".", markersize=2, color="C0")
    if math.isfinite(slope):
        k = np.array([lo, hi - 1], dtype=float) + 1.0
        anchor = float(np.abs(values[lo : lo + max(1, (hi - lo) // 40)]).max())
        ax.loglog(k, anchor * (k / k[0]) ** slope, "--", color="C3")
    ax.set_xlabel(f"{header[0]} + 1")
    ax.set_ylabel(f"|{header[1]}|")
    ax.text(
        0.97,
        0.95,
        f"slope={slope:.4f}" if math.isfinite(slope) else "slope=nan",
        transform=ax.transAxes,
        ha="right",
        va="top",
    )


def _draw_ratio(ax, header: list[str], table: np.ndarray) -> None:
    p, ratio = table[:, 0], table[:, 1]
    ax.semilogy(p, np.clip(ratio, 1e-300, None), "o-", markersize=3, color="C0")
    ax.axhline(1.0, color="C3", linestyle="--")
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    crossing = np.flatnonzero(np.diff(np.sign(np.log(np.clip(ratio, 1e-300, None)))))
    if crossing.size:
        i = int(crossing[0])
        y0, y1 = math.log(max(ratio[i], 1e-300)), math.log(max(ratio[i + 1], 1e-300))
        p_cross = p[i] + (p[i + 1] - p[i]) * (-y0) / (y1 - y0) if y1 != y0 else p[i]
        ax.axvline(p_cross, color="C2", linestyle=":")
        label = f"p*={p_cross:.3f}"
    else:
        label = "p*=none"
    ax.text(0.97, 0.95, label, transform=ax.transAxes, ha="right", va="top")


def render_plot(
    csv_path: str | Path,
    kind: Literal["loglog-spectrum", "ratio-curve"],
    out: str | Path,
    title: str | None = None,
) -> Path:
    if kind not in PLOT_KINDS:
        raise PlotError(f"Unknown plot kind {kind!r}; choose one of {', '.join(PLOT_KINDS)}")
    header, table = read_two_column_csv(csv_path)
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            if kind == "loglog-spectrum":
                _draw_spectrum(ax, header, table)
            else:
                _draw_ratio(ax, header, table)
            ax.set_title(title or Path(csv_path).stem)
            fig.tight_layout()
            fig.savefig(target, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    logger.debug("rendered %s plot to %s", kind, target)
    return target
