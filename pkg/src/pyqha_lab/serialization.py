from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .model_utils import params_to_dict
from .state import RunState

REPORT_SCHEMA = "qha-report/1"
REPORT_NAME = "report.json"
META_NAME = "meta.yaml"
SPECTRUM_NAME = "spectrum.csv"
SPECTRUM_HEADER = "n,lambda_n"


def _convert_paths_to_strings(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {k: _convert_paths_to_strings(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_convert_paths_to_strings(v) for v in value]
    return value


def _to_json_compatible(value: Any) -> Any:
    """Plain JSON types only; non-finite floats become the strings ``inf``/``-inf``/``nan``."""

    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _to_json_compatible(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_json_compatible(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_json_compatible(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _to_json_compatible(value.real), "im": _to_json_compatible(value.imag)}
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isfinite(number):
            return number
        return "nan" if math.isnan(number) else ("inf" if number > 0 else "-inf")
    return value


def serialize_config_to_yaml(config: Any, path: str | Path) -> None:
    output_path = Path(path)
    data = _convert_paths_to_strings(params_to_dict(config))
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(data, handle, sort_keys=False)


def report_to_json(report: dict[str, Any]) -> str:
    payload = {"schema": REPORT_SCHEMA, **report}
    return json.dumps(_to_json_compatible(payload), sort_keys=True, indent=2) + "\n"


def write_report(report: dict[str, Any], out_dir: str | Path) -> Path:
    target = Path(out_dir) / REPORT_NAME
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report_to_json(report), encoding="utf-8")
    return target


def _iso(timestamp: float | None) -> str | None:
    if timestamp is None:
        return None
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).isoformat()


def write_meta(state: RunState, out_dir: str | Path, extra: dict[str, Any] | None = None) -> Path:
    target = Path(out_dir) / META_NAME
    target.parent.mkdir(parents=True, exist_ok=True)
    data: dict[str, Any] = {
        "experiment": state.config.experiment,
        "started_at": _iso(state.started_at),
        "finished_at": _iso(state.finished_at),
        "elapsed_seconds": round(state.elapsed, 3),
        "exit_code": state.exit_code,
        "workers": state.config.workers,
        "stage_seconds": {k: round(v, 3) for k, v in state.stage_seconds.items()},
        "log": list(state.log_lines),
    }
    if extra:
        data.update(_to_json_compatible(extra))
    with target.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(data, handle, sort_keys=False)
    return target
