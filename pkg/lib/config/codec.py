import dataclasses
import types
from enum import Enum
from typing import Any, Union, cast, get_args, get_origin, get_type_hints

from .base import ConfigError


def config_to_dict(config: Any) -> dict[str, Any]:
    """Plain JSON-ready view of a (nested) config dataclass."""
    result: dict[str, Any] = {}
    for field in dataclasses.fields(config):
        result[field.name] = _encode(getattr(config, field.name))
    return result


def _encode(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return config_to_dict(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_encode(item) for item in cast(list[Any], value)]
    return value


def config_from_dict[T](cls: type[T], data: dict[str, Any], *, path: str = "") -> T:
    """Build a config dataclass from a mapping; unknown keys are rejected."""
    if not isinstance(data, dict):  # pyright: ignore[reportUnnecessaryIsInstance]
        raise ConfigError(f"Expected a mapping for {path or cls.__name__} (got {type(data).__name__})")

    hints = get_type_hints(cls)
    names = {field.name for field in dataclasses.fields(cast(Any, cls))}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"Unknown configuration key {path}{unknown[0]}")

    kwargs: dict[str, Any] = {}
    for key, raw in data.items():
        kwargs[key] = _decode(hints[key], raw, f"{path}{key}")
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"Invalid configuration for {path or cls.__name__} ({e})")


def _decode(hint: Any, raw: Any, path: str) -> Any:
    origin = get_origin(hint)
    if origin in (Union, types.UnionType):
        options = [arg for arg in get_args(hint) if arg is not type(None)]
        if raw is None:
            return None
        return _decode(options[0], raw, path)
    if origin in (list, tuple):
        if not isinstance(raw, list):
            raise ConfigError(f"Expected a list for {path} (got {raw!r})")
        item_hint = get_args(hint)[0]
        items = [_decode(item_hint, item, f"{path}[{i}]") for i, item in enumerate(cast(list[Any], raw))]
        return tuple(items) if origin is tuple else items
    if isinstance(hint, type) and dataclasses.is_dataclass(hint):
        return config_from_dict(hint, cast(dict[str, Any], raw), path=f"{path}.")
    if isinstance(hint, type) and issubclass(hint, Enum):
        try:
            return hint(raw)
        except ValueError:
            allowed = ", ".join(str(member.value) for member in hint)
            raise ConfigError(f"Invalid value for {path} (expected one of {allowed}, got {raw!r})")
    if hint is bool:
        if not isinstance(raw, bool):
            raise ConfigError(f"Expected a boolean for {path} (got {raw!r})")
        return raw
    if hint is int:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"Expected an integer for {path} (got {raw!r})")
        return raw
    if hint is float:
        if isinstance(raw, str):
            # YAML 1.1 reads exponents without a dot (1e-3) as strings
            try:
                return float(raw)
            except ValueError:
                pass
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"Expected a number for {path} (got {raw!r})")
        return float(raw)
    if hint is str:
        return str(raw)
    return raw
