from __future__ import annotations

import json
import math
import tempfile
import unittest
from pathlib import Path

import bootstrap  # noqa: F401
import numpy as np
import yaml

from pyqha_lab.serialization import REPORT_SCHEMA, report_to_json, write_meta, write_report
from pyqha_lab.state import ExperimentConfig, RunState


class ReportTests(unittest.TestCase):
    def test_non_finite_and_numpy_values(self) -> None:
        text = report_to_json(
            {
                "values": np.array([1.0, math.inf]),
                "nan": math.nan,
                "down": -math.inf,
                "flag": np.bool_(True),
                "count": np.int64(3),
                "z": 1 + 2j,
                "out": Path("runs/a"),
            }
        )
        data = json.loads(text)
        self.assertEqual(data["schema"], REPORT_SCHEMA)
        self.assertEqual(data["values"], [1.0, "inf"])
        self.assertEqual(data["nan"], "nan")
        self.assertEqual(data["down"], "-inf")
        self.assertIs(data["flag"], True)
        self.assertEqual(data["count"], 3)
        self.assertEqual(data["z"], {"re": 1.0, "im": 2.0})
        self.assertEqual(data["out"], "runs/a")

    def test_output_is_stable(self) -> None:
        report = {"b": 1.0, "a": [0.1, 0.2]}
        self.assertEqual(report_to_json(report), report_to_json(dict(reversed(report.items()))))

    def test_files(self) -> None:
        state = RunState(ExperimentConfig("transfer", workers=2))
        state.log("hello")
        state.stage_seconds["N=8"] = 0.25
        state.finish(0)
        with tempfile.TemporaryDirectory() as tmp_dir:
            report = write_report({"passed": True}, Path(tmp_dir) / "run")
            meta = write_meta(state, Path(tmp_dir) / "run", {"note": math.inf})
            self.assertTrue(json.loads(report.read_text(encoding="utf-8"))["passed"])
            data = yaml.safe_load(meta.read_text(encoding="utf-8"))
        self.assertEqual(data["experiment"], "transfer")
        self.assertEqual(data["exit_code"], 0)
        self.assertEqual(data["workers"], 2)
        self.assertEqual(data["stage_seconds"], {"N=8": 0.25})
        self.assertEqual(data["note"], "inf")
        self.assertTrue(data["log"][0].endswith("hello"))

    def test_effective_config_leaves_out_workers(self) -> None:
        config = ExperimentConfig("tau-sweep", workers=8)
        self.assertNotIn("workers", config.effective())


if __name__ == "__main__":
    unittest.main()
