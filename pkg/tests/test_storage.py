from __future__ import annotations

import json
import tempfile
import unittest
from pathlib import Path

import bootstrap  # noqa: F401
import numpy as np

from pyqha_lab.basis_cache import basis_path, load_basis, load_or_build, save_basis
from pyqha_lab.errors import CacheIntegrityError, MeasureSpecError, PlotError
from pyqha_lab.hermite_rep import hermite_basis, line_grid_for
from pyqha_lab.measure_io import load_measure, measure_summary, save_measure_csv
from pyqha_lab.operator_calculus import OperatorMatrix
from pyqha_lab.operator_io import (
    curve_to_csv,
    load_operator,
    operator_from_blob,
    operator_to_blob,
    operator_to_csv,
    read_two_column_csv,
    save_operator,
    spectrum_to_csv,
)
from pyqha_lab.phase_space import PhasePoint, circle


class OperatorIoTests(unittest.TestCase):
    def setUp(self) -> None:
        rng = np.random.default_rng(2)
        self.op = OperatorMatrix(
            rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)), "0123456789abcdef"
        )

    def test_blob_keeps_entries_and_fingerprint(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = save_operator(self.op, Path(tmp_dir) / "ops" / "t.qop")
            loaded = load_operator(path)
        np.testing.assert_array_equal(loaded.entries, self.op.entries)
        self.assertEqual(loaded.fingerprint, self.op.fingerprint)

    def test_corrupted_blob_rejected(self) -> None:
        blob = bytearray(operator_to_blob(self.op))
        blob[40] ^= 0xFF
        with self.assertRaises(CacheIntegrityError):
            operator_from_blob(bytes(blob))
        with self.assertRaises(CacheIntegrityError):
            operator_from_blob(b"QHAOP1")

    def test_csv_export_limit(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = operator_to_csv(self.op, Path(tmp_dir) / "t.csv")
            lines = path.read_text(encoding="utf-8").splitlines()
            self.assertEqual(lines[0], "m,n,re,im")
            self.assertEqual(len(lines), 26)
            with self.assertRaises(ValueError):
                operator_to_csv(OperatorMatrix(np.eye(65)), Path(tmp_dir) / "big.csv")

    def test_spectrum_csv_reads_back(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = spectrum_to_csv(np.array([1.0, 0.5, 0.25]), Path(tmp_dir) / "s.csv", "n,s_n")
            header, table = read_two_column_csv(path)
        self.assertEqual(header, ["n", "s_n"])
        np.testing.assert_array_equal(table[:, 0], [0, 1, 2])
        np.testing.assert_array_equal(table[:, 1], [1.0, 0.5, 0.25])

    def test_curve_columns_must_match(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            with self.assertRaises(ValueError):
                curve_to_csv(np.arange(3), np.arange(4), Path(tmp_dir) / "c.csv", "p,r")

    def test_unreadable_csv(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            empty = Path(tmp_dir) / "empty.csv"
            empty.write_text("", encoding="utf-8")
            wide = Path(tmp_dir) / "wide.csv"
            wide.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
            headless = Path(tmp_dir) / "headless.csv"
            headless.write_text("n,s_n\n", encoding="utf-8")
            for path in (empty, wide, headless, Path(tmp_dir) / "missing.csv"):
                with self.subTest(path=path.name), self.assertRaises(PlotError):
                    read_two_column_csv(path)


class MeasureIoTests(unittest.TestCase):
    def test_csv_atoms(self) -> None:
        mu = circle(0.5, 16, center=PhasePoint(1.0, 0.0))
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = save_measure_csv(mu, Path(tmp_dir) / "circle.csv")
            loaded = load_measure(path)
        np.testing.assert_allclose(loaded.atoms, mu.atoms)
        np.testing.assert_allclose(loaded.weights, mu.weights)
        self.assertEqual(loaded.kind, "atom-list")

    def test_json_description(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "mu.json"
            path.write_text(json.dumps({"kind": "circle", "radius": 2.0, "nodes": 32}))
            mu = load_measure(path)
        summary = measure_summary(mu)
        self.assertEqual(summary["kind"], "circle")
        self.assertEqual(summary["atoms"], 32)
        self.assertAlmostEqual(summary["total_variation"], 1.0)
        self.assertAlmostEqual(summary["radius_bound"], 2.0)

    def test_yaml_description(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "mu.yaml"
            path.write_text("kind: dirac\ncenter: [0.5, -1.0]\n", encoding="utf-8")
            mu = load_measure(path)
        self.assertEqual(mu.kind, "dirac")
        np.testing.assert_array_equal(mu.atoms, [[0.5, -1.0]])

    def test_bad_files(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            header = Path(tmp_dir) / "bad.csv"
            header.write_text("x,y,w\n0,0,1\n", encoding="utf-8")
            broken = Path(tmp_dir) / "broken.yaml"
            broken.write_text("kind: [unterminated\n", encoding="utf-8")
            for path in (header, broken, Path(tmp_dir) / "missing.json"):
                with self.subTest(path=path.name), self.assertRaises(MeasureSpecError):
                    load_measure(path)


class BasisCacheTests(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = line_grid_for(8)
        self.basis = hermite_basis(8, self.grid)

    def test_save_and_load(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            save_basis(self.basis, tmp_dir)
            loaded = load_basis(8, self.grid, tmp_dir)
        np.testing.assert_array_equal(loaded.table, self.basis.table)
        self.assertEqual(loaded.fingerprint, self.basis.fingerprint)

    def test_missing_entry(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            self.assertIsNone(load_basis(8, self.grid, tmp_dir))

    def test_corrupt_entry_is_rebuilt(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = save_basis(self.basis, tmp_dir)
            path.write_bytes(b"not an npz file")
            rebuilt = load_or_build(8, self.grid, tmp_dir)
            self.assertEqual(rebuilt.fingerprint, self.basis.fingerprint)
            self.assertIsNotNone(load_basis(8, self.grid, tmp_dir))

    def test_tampered_table_fails_checksum(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = save_basis(self.basis, tmp_dir)
            with np.load(path) as data:
                stored = {key: np.array(data[key]) for key in data.files}
            stored["table"][0, 0] += 1.0
            np.savez(path, **stored)
            with self.assertRaises(CacheIntegrityError):
                load_basis(8, self.grid, tmp_dir)

    def test_path_names_size_and_grid(self) -> None:
        name = basis_path(8, self.grid, "cache").name
        self.assertIn("N8", name)
        self.assertIn(f"M{self.grid.points}", name)


if __name__ == "__main__":
    unittest.main()
