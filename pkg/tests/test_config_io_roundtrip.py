from __future__ import annotations

import json
import tempfile
import unittest
from pathlib import Path

import bootstrap  # noqa: F401
import yaml

from pyqha_lab.config_io import (
    build_experiment_config,
    load_config_from_file,
    parse_override,
    save_config_to_yaml,
    split_run_keys,
)
from pyqha_lab.errors import ConfigError


class ConfigIoRoundtripTests(unittest.TestCase):
    def test_yaml_roundtrip(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            source = Path(tmp_dir) / "tau.yaml"
            source.write_text(
                yaml.safe_dump(
                    {
                        "experiment": "tau-sweep",
                        "seed": 7,
                        "N": 32,
                        "grid": {"L": 5.0, "M": 48},
                        "params": {"taus": [0.0, 0.5, 1.0]},
                    }
                ),
                encoding="utf-8",
            )
            config = load_config_from_file(source)
            self.assertEqual(config.experiment, "tau-sweep")
            self.assertEqual(config.seed, 7)
            self.assertEqual(config.N, 32)
            self.assertEqual(config.grid.L, 5.0)
            self.assertEqual(config.grid.M, 48)

            saved = Path(tmp_dir) / "nested" / "saved.yaml"
            save_config_to_yaml(config, saved)
            raw = yaml.safe_load(saved.read_text(encoding="utf-8"))
            self.assertEqual(raw["out_dir"], "qha_out")
            self.assertEqual(raw["params"], {"taus": [0.0, 0.5, 1.0]})

    def test_precedence_file_then_overrides_then_flags(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            source = Path(tmp_dir) / "run.json"
            source.write_text(json.dumps({"seed": 1, "N": 8, "samples": 10}), encoding="utf-8")
            config = build_experiment_config(
                "bak-ratios",
                source,
                flags={"seed": 3, "N": None, "out_dir": Path(tmp_dir) / "out"},
                overrides=["--samples=20", "--N=16"],
            )
            self.assertEqual(config.seed, 3)
            self.assertEqual(config.N, 16)
            self.assertEqual(config.params, {"samples": "20"})
            self.assertEqual(config.out_dir, Path(tmp_dir) / "out")

    def test_toml_config(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            source = Path(tmp_dir) / "run.toml"
            source.write_text('seed = 4\n[params]\nmeasure = "dirac"\n', encoding="utf-8")
            config = build_experiment_config("compactness", source)
            self.assertEqual(config.seed, 4)
            self.assertEqual(config.params, {"measure": "dirac"})

    def test_experiment_mismatch(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            source = Path(tmp_dir) / "run.yaml"
            source.write_text("experiment: transfer\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                build_experiment_config("tau-sweep", source)

    def test_bad_inputs(self) -> None:
        with self.assertRaises(ConfigError):
            build_experiment_config("transfer", "missing.yaml")
        with self.assertRaises(ConfigError):
            parse_override("--seed")
        with self.assertRaises(ConfigError):
            split_run_keys({"grid": {"K": 3}})
        with self.assertRaises(ConfigError):
            build_experiment_config("transfer", overrides=["--seed=abc"])

    def test_override_keys_are_normalized(self) -> None:
        self.assertEqual(parse_override("--circle-nodes=128"), ("circle_nodes", "128"))


if __name__ == "__main__":
    unittest.main()
