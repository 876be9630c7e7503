from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import dataclass
from typing import Any

import yaml

from .errors import ConfigError

MISSING = object()


@dataclass(frozen=True)
class ParamSpec:
    name: str
    annotation: Any
    default: Any = MISSING
    required: bool = False
    help: str = ""


def _field_default(field: dataclasses.Field) -> Any:
    if field.default is not dataclasses.MISSING:
        return field.default
    if field.default_factory is not dataclasses.MISSING:
        return field.default_factory()
    return MISSING


def iter_param_specs(params_cls: type[Any]) -> list[ParamSpec]:
    if not dataclasses.is_dataclass(params_cls):
        raise TypeError(f"{params_cls!r} is not a dataclass")
    hints = typing.get_type_hints(params_cls)
    specs: list[ParamSpec] = []
    for field in dataclasses.fields(params_cls):
        default = _field_default(field)
        specs.append(
            ParamSpec(
                name=field.name,
                annotation=hints.get(field.name, Any),
                default=default,
                required=default is MISSING,
                help=str(field.metadata.get("help", "")),
            )
        )
    return specs


def params_to_dict(params: Any) -> dict[str, Any]:
    if dataclasses.is_dataclass(params):
        return dataclasses.asdict(params)
    if isinstance(params, dict):
        return dict(params)
    raise TypeError(f"Unsupported params type: {type(params)!r}")


def _strip_optional(annotation: Any) -> tuple[Any, bool]:
    origin = typing.get_origin(annotation)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return annotation, False


def coerce_value(name: str, value: Any, annotation: Any) -> Any:
    """Coerce a config or command-line value to a dataclass field annotation."""

    if isinstance(value, str) and annotation is not str:
        try:
            value = yaml.safe_load(value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{name}: cannot parse {value!r}: {exc}") from exc

    target, optional = _strip_optional(annotation)
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{name}: a value is required")

    origin = typing.get_origin(target)
    try:
        if target is bool:
            if isinstance(value, bool):
                return value
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        if target is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise ConfigError(f"{name}: expected an integer, got {value!r}")
            return int(value)
        if target is float:
            if isinstance(value, bool):
                raise ConfigError(f"{name}: expected a number, got {value!r}")
            return float(value)
        if target is str:
            return str(value)
        if origin is tuple:
            if isinstance(value, str):
                value = [item.strip() for item in value.split(",") if item.strip()]
            items = value if isinstance(value, (list, tuple)) else [value]
            args = typing.get_args(target)
            item_type = args[0] if args else Any
            return tuple(coerce_value(name, item, item_type) for item in items)
        if origin is dict or target is dict:
            if not isinstance(value, dict):
                raise ConfigError(f"{name}: expected a mapping, got {value!r}")
            return dict(value)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{name}: cannot convert {value!r}: {exc}") from exc
    return value


def build_params(params_cls: type[Any], values: dict[str, Any]) -> Any:
    specs = {spec.name: spec for spec in iter_param_specs(params_cls)}
    unknown = sorted(set(values) - set(specs))
    if unknown:
        raise ConfigError(
            f"Unknown parameter(s) {', '.join(unknown)}; valid keys: {', '.join(sorted(specs))}"
        )
    kwargs: dict[str, Any] = {}
    for name, spec in specs.items():
        if name in values:
            kwargs[name] = coerce_value(name, values[name], spec.annotation)
        elif spec.required:
            raise ConfigError(f"Missing required parameter {name!r}")
    try:
        return params_cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
