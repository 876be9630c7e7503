from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import MeasureSpecError
from .phase_space import DiscreteMeasure, PhasePoint, atom_list, build_measure

CSV_COLUMNS = ("x", "xi", "re_w", "im_w")


def load_measure(path: str | Path) -> DiscreteMeasure:
    """Load a measure from a JSON/YAML description or a CSV atom table."""

    source = Path(path)
    if not source.is_file():
        raise MeasureSpecError(f"Measure file not found: {source}")
    if source.suffix.lower() == ".csv":
        return load_measure_csv(source)
    text = source.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if source.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise MeasureSpecError(f"Could not parse measure file {source}: {exc}") from exc
    return build_measure(data)


def load_measure_csv(path: str | Path, center: PhasePoint | None = None) -> DiscreteMeasure:
    source = Path(path)
    with source.open("r", encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
    if tuple(col.strip() for col in header) != CSV_COLUMNS:
        raise MeasureSpecError(
            f"{source}: expected header {','.join(CSV_COLUMNS)}, got {','.join(header)}"
        )
    try:
        table = np.loadtxt(source, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise MeasureSpecError(f"{source}: malformed atom table: {exc}") from exc
    if table.size == 0 or table.shape[1] != len(CSV_COLUMNS):
        raise MeasureSpecError(f"{source}: atom table must have rows of {len(CSV_COLUMNS)} values")
    weights = table[:, 2] + 1j * table[:, 3]
    return atom_list(table[:, :2], weights, center)


def save_measure_csv(mu: DiscreteMeasure, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([mu.atoms, mu.weights.real, mu.weights.imag])
    np.savetxt(
        target, table, delimiter=",", header=",".join(CSV_COLUMNS), comments="", fmt="%.17g"
    )
    return target


def measure_summary(mu: DiscreteMeasure) -> dict[str, Any]:
    return {
        "kind": mu.kind,
        "atoms": mu.size,
        "total_variation": mu.total_variation,
        "center": [mu.center.x, mu.center.xi],
        "radius_bound": mu.radius_bound,
    }
