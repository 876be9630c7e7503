from __future__ import annotations

import tempfile
import unittest
from pathlib import Path

import bootstrap  # noqa: F401
import numpy as np

from pyqha_lab.errors import PlotError
from pyqha_lab.operator_io import curve_to_csv, spectrum_to_csv
from pyqha_lab.plotting import fit_range, fitted_slope, marker_indices, render_plot


class PlotHelperTests(unittest.TestCase):
    def test_fit_range(self) -> None:
        self.assertEqual(fit_range(1_000_000), (1000, 100_000))
        self.assertEqual(fit_range(64), (1, 64))

    def test_power_law_slope(self) -> None:
        values = np.arange(1, 20_001, dtype=float) ** -0.25
        slope, _ = fitted_slope(values)
        self.assertAlmostEqual(slope, -0.25, delta=0.01)

    def test_marker_thinning_keeps_ends(self) -> None:
        shown = marker_indices(1_000_000, 512)
        self.assertLessEqual(len(shown), 512)
        self.assertEqual(shown[0], 0)
        self.assertEqual(shown[-1], 999_999)
        np.testing.assert_array_equal(marker_indices(10), np.arange(10))


class RenderTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_spectrum_plot_is_deterministic(self) -> None:
        k = np.arange(1, 5001, dtype=float)
        csv = spectrum_to_csv(k**-0.25 * np.cos(k), self.tmp / "spectrum.csv", "n,lambda_n")
        first = render_plot(csv, "loglog-spectrum", self.tmp / "a.svg", "circle")
        second = render_plot(csv, "loglog-spectrum", self.tmp / "b.svg", "circle")
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertIn("slope=", first.read_text(encoding="utf-8"))

    def test_ratio_plot_marks_crossing(self) -> None:
        p = np.linspace(2.0, 6.0, 9)
        csv = curve_to_csv(p, 2.0 ** (1.0 - p / 4.0), self.tmp / "ratio.csv", "p,block_ratio")
        svg = render_plot(csv, "ratio-curve", self.tmp / "ratio.svg").read_text(encoding="utf-8")
        self.assertIn("p*=4.000", svg)

    def test_ratio_plot_without_crossing(self) -> None:
        csv = curve_to_csv(np.array([1.0, 2.0]), np.array([2.0, 3.0]), self.tmp / "r.csv", "p,r")
        svg = render_plot(csv, "ratio-curve", self.tmp / "r.svg").read_text(encoding="utf-8")
        self.assertIn("p*=none", svg)

    def test_rejections(self) -> None:
        empty = self.tmp / "empty.csv"
        empty.write_text("", encoding="utf-8")
        zeros = spectrum_to_csv(np.zeros(8), self.tmp / "zeros.csv")
        with self.assertRaises(PlotError):
            render_plot(empty, "loglog-spectrum", self.tmp / "e.svg")
        with self.assertRaises(PlotError):
            render_plot(zeros, "loglog-spectrum", self.tmp / "z.svg")
        with self.assertRaises(PlotError):
            render_plot(zeros, "histogram", self.tmp / "h.svg")


if __name__ == "__main__":
    unittest.main()
