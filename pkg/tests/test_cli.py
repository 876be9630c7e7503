from __future__ import annotations

import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

import bootstrap  # noqa: F401

from pyqha_lab.app import main
from pyqha_lab.config_io import build_experiment_config
from pyqha_lab.errors import ConfigError
from pyqha_lab.experiments import get_experiment, list_experiments
from pyqha_lab.runner import EXIT_FAILED, EXIT_PASS, EXIT_USAGE, relative_delta, run_experiment


def run_cli(*args: str) -> tuple[int, str]:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(args))
    return code, out.getvalue() + err.getvalue()


class RegistryTests(unittest.TestCase):
    def test_ten_experiments_with_anchors(self) -> None:
        rows = list_experiments()
        self.assertEqual(len(rows), 10)
        self.assertEqual(len({name for name, _, _ in rows}), 10)
        for name, description, anchor in rows:
            with self.subTest(name=name):
                self.assertTrue(description)
                self.assertTrue(anchor)

    def test_unknown_experiment(self) -> None:
        with self.assertRaises(ConfigError) as ctx:
            get_experiment("gamma-sweep")
        self.assertIn("transfer", str(ctx.exception))

    def test_relative_delta(self) -> None:
        self.assertEqual(relative_delta(2.0, 2.0), 0.0)
        self.assertAlmostEqual(relative_delta(1.0, 2.0), 0.5)
        self.assertIsNone(relative_delta(None, 1.0))
        self.assertIsNone(relative_delta(float("nan"), 1.0))


class CommandLineTests(unittest.TestCase):
    def test_usage(self) -> None:
        self.assertEqual(run_cli()[0], EXIT_USAGE)
        code, text = run_cli("--help")
        self.assertEqual(code, EXIT_PASS)
        self.assertIn("qha list", text)
        self.assertIn("3  the experiment ran but at least one pass flag is false", text)

    def test_list(self) -> None:
        code, text = run_cli("list")
        self.assertEqual(code, EXIT_PASS)
        self.assertIn("sphere-schatten", text)

    def test_unknown_parameter_lists_valid_keys(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            code, text = run_cli("tau-sweep", "--gamma=1", "--out", tmp_dir)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("gamma", text)
        self.assertIn("taus", text)

    def test_unknown_experiment_prints_table(self) -> None:
        code, text = run_cli("no-such-experiment")
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("compactness", text)

    def test_stray_argument(self) -> None:
        self.assertEqual(run_cli("transfer", "extra")[0], EXIT_USAGE)

    def test_plot_missing_file(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            code, _ = run_cli("plot", str(Path(tmp_dir) / "missing.csv"))
        self.assertEqual(code, EXIT_USAGE)


class RunTests(unittest.TestCase):
    def test_dirac_is_not_compact(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            config = build_experiment_config(
                "compactness",
                flags={"N": 8, "out_dir": tmp_dir},
                overrides=["--measure=dirac"],
            )
            result = run_experiment(config)
            report = json.loads((Path(tmp_dir) / "report.json").read_text(encoding="utf-8"))
            self.assertTrue((Path(tmp_dir) / "meta.yaml").is_file())
        self.assertEqual(result.exit_code, EXIT_PASS)
        self.assertEqual(report["details"]["N"]["verdict"], "not compact")
        self.assertEqual(
            report["truncation"], {"N": 8, "N2": 16, "meaning": "Hermite truncation N"}
        )
        self.assertTrue(report["gate"]["max_error"] < report["gate"]["tolerance"])
        self.assertTrue(report["passed"])

    def test_sphere_schatten_writes_spectrum_and_plot(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            code, _ = run_cli("sphere-schatten", "--N", "131072", "--out", tmp_dir, "--quiet")
            names = sorted(path.name for path in Path(tmp_dir).iterdir())
            report = json.loads((Path(tmp_dir) / "report.json").read_text(encoding="utf-8"))
            spectrum = (Path(tmp_dir) / "spectrum.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(code, EXIT_PASS)
        self.assertEqual(
            names,
            ["meta.yaml", "plot.svg", "ratio.csv", "ratio.svg", "report.json", "spectrum.csv"],
        )
        self.assertEqual(spectrum[0], "n,lambda_n")
        self.assertEqual(len(spectrum), 131073)
        self.assertIsNone(report["gate"])
        self.assertAlmostEqual(report["results"]["p_star"]["value"], 4.0, delta=0.1)
        self.assertAlmostEqual(report["results"]["p_star"]["value_2N"], 4.0, delta=0.1)
        self.assertLess(report["results"]["closed_form_error"]["value"], 1e-8)
        self.assertTrue(report["stability"]["p_star_stable"])

    def test_tau_sweep_checks_every_threshold(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            config = build_experiment_config(
                "tau-sweep", flags={"N": 16, "out_dir": tmp_dir}, overrides=["--p_tol=0"]
            )
            result = run_experiment(config)
        self.assertEqual(result.exit_code, EXIT_FAILED)
        passes = result.report["passes"]
        for key in ("p_star_tau0", "p_star_tau0.5", "p_star_tau1"):
            with self.subTest(key=key):
                self.assertFalse(passes[key])
        self.assertIn("thresholds_agree", passes)
        self.assertTrue(passes["half_is_weyl"])
        self.assertEqual(result.report["details"]["N"]["expected_p"], 4.0)

    def test_pool_isometry_follows_grid_overrides(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            default = run_experiment(
                build_experiment_config(
                    "pool-isometry", flags={"N": 8, "out_dir": tmp_dir}, overrides=["--symbols=2"]
                )
            )
            custom = run_experiment(
                build_experiment_config(
                    "pool-isometry",
                    flags={"N": 8, "out_dir": tmp_dir},
                    overrides=["--symbols=2", "--L=5", "--M=40"],
                )
            )
        details = default.report["details"]["N"]
        self.assertEqual(details["moyal_grid"], [6.0, 64])
        self.assertEqual(details["inversion_grid"], [6.0, 128])
        self.assertTrue(default.report["passes"]["moyal"])
        self.assertTrue(default.report["passes"]["inversion"])
        details = custom.report["details"]["N"]
        self.assertEqual(details["moyal_grid"], [5.0, 40])
        self.assertEqual(details["inversion_grid"], [5.0, 40])


if __name__ == "__main__":
    unittest.main()
