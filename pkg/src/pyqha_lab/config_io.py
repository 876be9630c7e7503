from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .model_utils import coerce_value
from .serialization import serialize_config_to_yaml
from .state import ExperimentConfig, GridOverrides

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIG_SUFFIXES = (".json", ".yaml", ".yml", ".toml")
RUN_KEYS = {
    "experiment": str,
    "seed": int,
    "N": int | None,
    "workers": int | None,
    "out_dir": str,
    "L": float | None,
    "M": int | None,
}
RUN_KEY_ALIASES = {"out": "out_dir", "n": "N"}


def read_config_file(path: str | Path) -> dict[str, Any]:
    source = Path(path)
    if not source.is_file():
        raise ConfigError(f"Config file not found: {source}")
    suffix = source.suffix.lower()
    if suffix not in CONFIG_SUFFIXES:
        raise ConfigError(
            f"Unsupported config format {suffix!r}; use one of {', '.join(CONFIG_SUFFIXES)}"
        )
    try:
        if suffix == ".toml":
            with source.open("rb") as handle:
                data = tomllib.load(handle)
        else:
            text = source.read_text(encoding="utf-8")
            data = json.loads(text) if suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"Could not parse {source}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping, got {type(data).__name__}")
    return data


def split_run_keys(data: dict[str, Any]) -> tuple[dict[str, Any], dict[str, Any]]:
    """Separate run-level keys from experiment parameters.

    A nested ``params`` mapping and flat top-level keys are both accepted.
    """

    run: dict[str, Any] = {}
    params: dict[str, Any] = {}
    for raw_key, value in data.items():
        key = RUN_KEY_ALIASES.get(raw_key, raw_key)
        if key == "params":
            if not isinstance(value, dict):
                raise ConfigError("'params' must be a mapping")
            params.update(value)
        elif key == "grid" and isinstance(value, dict):
            for grid_key, grid_value in value.items():
                if grid_key not in ("L", "M"):
                    raise ConfigError(f"Unknown grid key {grid_key!r}; valid keys: L, M")
                run[grid_key] = grid_value
        elif key in RUN_KEYS:
            run[key] = value
        else:
            params[key] = value
    return run, params


def parse_override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"Override {text!r} must look like --key=value")
    key, value = text.split("=", 1)
    key = key.strip().lstrip("-").replace("-", "_")
    if not key:
        raise ConfigError(f"Override {text!r} has an empty key")
    return key, value


def build_experiment_config(
    experiment: str,
    config_path: str | Path | None = None,
    flags: dict[str, Any] | None = None,
    overrides: list[str] | None = None,
) -> ExperimentConfig:
    """Merge defaults < config file < command-line flags and ``--key=value`` overrides."""

    run: dict[str, Any] = {}
    params: dict[str, Any] = {}
    if config_path is not None:
        file_run, file_params = split_run_keys(read_config_file(config_path))
        run.update(file_run)
        params.update(file_params)
    if overrides:
        over_run, over_params = split_run_keys(dict(parse_override(item) for item in overrides))
        run.update(over_run)
        params.update(over_params)
    for key, value in (flags or {}).items():
        if value is not None:
            run[RUN_KEY_ALIASES.get(key, key)] = value

    file_experiment = run.pop("experiment", None)
    if file_experiment is not None and str(file_experiment) != experiment:
        raise ConfigError(
            f"Config names experiment {file_experiment!r} but {experiment!r} was requested"
        )
    typed = {key: coerce_value(key, value, RUN_KEYS[key]) for key, value in run.items()}
    return ExperimentConfig(
        experiment=experiment,
        params=params,
        seed=typed.get("seed", 0),
        out_dir=Path(typed.get("out_dir", "qha_out")),
        N=typed.get("N"),
        workers=typed.get("workers"),
        grid=GridOverrides(L=typed.get("L"), M=typed.get("M")),
    )


def load_config_from_file(path: str | Path, experiment: str | None = None) -> ExperimentConfig:
    data = read_config_file(path)
    name = experiment or data.get("experiment")
    if not name:
        raise ConfigError(f"{path}: no experiment named and none given")
    return build_experiment_config(str(name), path)


def save_config_to_yaml(config: ExperimentConfig, path: str | Path) -> None:
    serialize_config_to_yaml(config, path)
