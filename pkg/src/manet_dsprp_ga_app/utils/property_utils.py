# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : property_utils.py
# Config loading for YAML and plain `key = value` files.
# ---------------------------------------------------------

from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml

from manet_dsprp_ga_app.exceptions import ConfigurationError

_MISSING = object()


class PropertyUtils:
    """
    Reads configuration files into plain dictionaries.

    YAML files keep their nesting (`props["logs"]["suffix"]`); `key = value`
    files are flat and every value stays a string.
    """

    def get_yaml_config_properties(self, config_file: str) -> Dict[str, Any]:
        path = Path(config_file)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {config_file}", key="config")
        with path.open("r", encoding="utf-8") as fh:
            props = yaml.safe_load(fh) or {}
        if not isinstance(props, dict):
            raise ConfigurationError(f"Top level of {config_file} must be a mapping", key="config")
        return props

    def get_key_value_properties(self, config_file: str) -> Dict[str, str]:
        path = Path(config_file)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {config_file}", key="config")
        props: Dict[str, str] = {}
        with path.open("r", encoding="utf-8") as fh:
            for line_number, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(
                        f"{config_file}:{line_number}: expected 'key = value', got {raw.strip()!r}"
                    )
                key, value = (part.strip() for part in line.split("=", 1))
                if not key:
                    raise ConfigurationError(f"{config_file}:{line_number}: empty key")
                props[key] = value
        return props

    def get_config_properties(self, config_file: str) -> Dict[str, Any]:
        """Dispatches on the file extension."""
        if Path(config_file).suffix.lower() in (".yaml", ".yml"):
            return self.get_yaml_config_properties(config_file)
        return self.get_key_value_properties(config_file)


def _lookup(props: Dict[str, Any], name: str) -> Any:
    node: Any = props
    for part in name.split("."):
        if not isinstance(node, dict) or part not in node:
            return _MISSING
        node = node[part]
    return node


def property_validation(
    props: Dict[str, Any],
    name: str,
    dtype: type,
    required: bool = False,
    allowed_values: Optional[Iterable[Any]] = None,
    default: Any = None,
    help: str = "",
) -> Any:
    """
    Fetch a dotted property and coerce it to `dtype`.

    Raises ConfigurationError naming the key when it is required and missing,
    cannot be coerced, or is not one of `allowed_values`.
    """
    value = _lookup(props, name)
    if value is _MISSING or value is None:
        if required:
            hint = f" ({help})" if help else ""
            raise ConfigurationError(f"Missing required property '{name}'{hint}", key=name)
        return default
    try:
        if dtype is bool and isinstance(value, str):
            lowered = value.strip().lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            value = lowered in ("true", "1", "yes")
        else:
            value = dtype(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(
            f"Property '{name}' must be of type {dtype.__name__}, got {value!r}", key=name
        ) from e
    if allowed_values is not None:
        allowed = list(allowed_values)
        if value not in allowed:
            raise ConfigurationError(
                f"Property '{name}' must be one of {allowed}, got {value!r}", key=name
            )
    return value
