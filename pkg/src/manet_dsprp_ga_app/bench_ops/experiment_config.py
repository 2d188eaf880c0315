# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : experiment_config.py
# Experiment configuration from CLI flags and an optional config file.
# ---------------------------------------------------------

import argparse
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from manet_dsprp_ga_app.exceptions import ConfigurationError, ParameterError
from manet_dsprp_ga_app.ga_ops.ga_engine import GaParams
from manet_dsprp_ga_app.topology_ops.graph_topology import (
    ChangeMode,
    CostModel,
    DynamicsSchedule,
    RwpParams,
)
from manet_dsprp_ga_app.utils.property_utils import PropertyUtils

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    SGA = "sga"
    RIGA = "riga"
    EIGA = "eiga"
    MEGA = "mega"
    EIGA_MEGA = "eiga-mega"


@dataclass(frozen=True)
class ExperimentConfig:
    rwp: RwpParams
    schedule: DynamicsSchedule
    ga: GaParams
    schemes: Tuple[Scheme, ...]
    source: int
    destination: int
    generations: int = 10
    replications: int = 1
    seed: int = 0
    out: str = "results.csv"
    trace_memory: bool = False
    workers: int = 1
    topology: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.schemes:
            raise ConfigurationError("At least one scheme is required", key="scheme")
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        if self.source == self.destination:
            raise ConfigurationError("'source' and 'dest' must differ", key="dest")
        for key, node in (("source", self.source), ("dest", self.destination)):
            if not 0 <= node < self.rwp.node_count:
                raise ConfigurationError(
                    f"Invalid value for '{key}': node {node} outside [0, {self.rwp.node_count})", key=key
                )
        if (
            self.schedule.change_mode is ChangeMode.NODE_TOGGLE
            and self.schedule.total_changes > 0
            and self.schedule.toggle_count > self.rwp.node_count - 2
        ):
            raise ConfigurationError(
                f"Invalid value for 'change-mode': cannot toggle {self.schedule.toggle_count} of "
                f"{self.rwp.node_count - 2} internal nodes",
                key="change-mode",
            )
        for key, value, low in (("gens", self.generations, 1), ("reps", self.replications, 1),
                                ("seed", self.seed, 0), ("workers", self.workers, 1)):
            if value < low:
                raise ConfigurationError(f"Invalid value for '{key}': must be >= {low}, got {value}", key=key)

    @property
    def scheme(self) -> Scheme:
        if len(self.schemes) != 1:
            raise ConfigurationError(
                f"Expected a single scheme, got {[s.value for s in self.schemes]}", key="scheme"
            )
        return self.schemes[0]

    def with_scheme(self, scheme: Scheme) -> "ExperimentConfig":
        return replace(self, schemes=(Scheme(scheme),))

    def same_except_scheme(self, other: "ExperimentConfig") -> bool:
        return replace(self, schemes=other.schemes) == other


@dataclass(frozen=True)
class _Option:
    key: str
    nargs: Any
    help: str
    flag: bool = False


OPTIONS: Tuple[_Option, ...] = (
    _Option("scheme", None, "sga|riga|eiga|mega|eiga-mega, comma separated to compare schemes"),
    _Option("nodes", None, "number of nodes"),
    _Option("area", 2, "system area width and height (m)"),
    _Option("range", None, "radio range (m)"),
    _Option("speed", 2, "min and max node speed (m/s)"),
    _Option("pause", None, "pause time at a waypoint (s)"),
    _Option("cost-model", "+", "unit | distance | random LO HI"),
    _Option("change-mode", 2, "toggle K | mobility DT"),
    _Option("change-interval", None, "generations between environment changes"),
    _Option("changes", None, "number of environment changes (default: every interval)"),
    _Option("pop", None, "population size n"),
    _Option("gens", None, "generations per replication"),
    _Option("pc", None, "crossover probability"),
    _Option("pm", None, "mutation probability"),
    _Option("rei", None, "elitism-based immigrant ratio"),
    _Option("rri", None, "random immigrant ratio"),
    _Option("pmi", None, "immigrant mutation probability"),
    _Option("memory-size", None, "memory size m (default max(1, floor(0.1 n)))"),
    _Option("source", None, "source node id"),
    _Option("dest", None, "destination node id (default: last node)"),
    _Option("seed", None, "master seed"),
    _Option("reps", None, "replications"),
    _Option("out", None, "primary CSV output file"),
    _Option("trace-memory", None, "dump memory contents per generation", flag=True),
    _Option("workers", None, "parallel replication workers"),
    _Option("topology", None, "topology file for solve_topology"),
)
KNOWN_KEYS = {option.key for option in OPTIONS}

# ParameterError.field -> config key
_FIELD_KEYS = {
    "area": "area", "radio_range": "range", "speed": "speed", "pause_time": "pause",
    "node_count": "nodes", "cost_model": "cost-model", "change_interval": "change-interval",
    "changes": "changes", "change_mode": "change-mode", "n": "pop", "p_c": "pc", "p_m": "pm",
    "r_ri": "rri", "r_ei": "rei", "p_m_i": "pmi", "m": "memory-size",
}


def add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    for option in OPTIONS:
        dest = option.key.replace("-", "_")
        if option.flag:
            parser.add_argument(f"--{option.key}", dest=dest, action="store_true", default=None, help=option.help)
        else:
            parser.add_argument(f"--{option.key}", dest=dest, nargs=option.nargs, default=None, help=option.help)
    parser.add_argument("--config", "--config_file_path", dest="config", default=None,
                        help="YAML or `key = value` config file")


def _file_values(config_file: str) -> Dict[str, Any]:
    pu = PropertyUtils()
    props = pu.get_config_properties(config_file)
    if Path(config_file).suffix.lower() in (".yaml", ".yml"):
        unknown_sections = set(props) - {"app", "logs", "experiment"}
        if unknown_sections:
            key = sorted(unknown_sections)[0]
            raise ConfigurationError(f"Unknown config section '{key}' in {config_file}", key=key)
        props = props.get("experiment") or {}
    values = {}
    for key, value in props.items():
        normalized = str(key).strip().replace("_", "-")
        if normalized not in KNOWN_KEYS:
            raise ConfigurationError(f"Unknown config key '{key}' in {config_file}", key=str(key))
        values[normalized] = value
    return values


def _tokens(key: str, value: Any) -> List[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    text = str(value).strip()
    if not text:
        raise ConfigurationError(f"Empty value for '{key}'", key=key)
    return text.replace(",", " ").split() if key != "scheme" else [text]


def _number(key: str, token: Any, kind: type) -> Any:
    try:
        if kind is int:
            as_float = float(token)
            if not as_float.is_integer():
                raise ValueError(token)
            return int(as_float)
        return float(token)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Invalid value for '{key}': expected {kind.__name__}, got {token!r}", key=key) from None


def _single(key: str, value: Any, kind: type) -> Any:
    tokens = _tokens(key, value)
    if len(tokens) != 1:
        raise ConfigurationError(f"Invalid value for '{key}': expected one value, got {tokens}", key=key)
    return _number(key, tokens[0], kind)


def _pair(key: str, value: Any, kind: type) -> Tuple[Any, Any]:
    tokens = _tokens(key, value)
    if len(tokens) != 2:
        raise ConfigurationError(f"Invalid value for '{key}': expected two values, got {tokens}", key=key)
    return _number(key, tokens[0], kind), _number(key, tokens[1], kind)


def _bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text not in ("true", "false", "1", "0", "yes", "no"):
        raise ConfigurationError(f"Invalid value for '{key}': expected a boolean, got {value!r}", key=key)
    return text in ("true", "1", "yes")


def _schemes(value: Any) -> Tuple[Scheme, ...]:
    raw = value if isinstance(value, (list, tuple)) else str(value).split(",")
    names = [str(v).strip().lower() for item in raw for v in str(item).split(",") if str(v).strip()]
    try:
        return tuple(Scheme(name) for name in names)
    except ValueError:
        raise ConfigurationError(
            f"Invalid value for 'scheme': {names}; choose from {[s.value for s in Scheme]}", key="scheme"
        ) from None


def _cost_model(value: Any) -> Dict[str, Any]:
    tokens = _tokens("cost-model", value)
    name = tokens[0].lower()
    if name in ("unit", "distance") and len(tokens) == 1:
        return {"cost_model": CostModel(name)}
    if name in ("random", "uniform_random") and len(tokens) == 3:
        lo, hi = _number("cost-model", tokens[1], float), _number("cost-model", tokens[2], float)
        return {"cost_model": CostModel.UNIFORM_RANDOM, "cost_lo": lo, "cost_hi": hi}
    raise ConfigurationError(
        f"Invalid value for 'cost-model': expected unit | distance | random LO HI, got {tokens}", key="cost-model"
    )


def _change_mode(value: Any) -> Dict[str, Any]:
    tokens = _tokens("change-mode", value)
    if len(tokens) == 2 and tokens[0].lower() == "toggle":
        return {"change_mode": ChangeMode.NODE_TOGGLE, "toggle_count": _number("change-mode", tokens[1], int)}
    if len(tokens) == 2 and tokens[0].lower() == "mobility":
        return {"change_mode": ChangeMode.MOBILITY_ADVANCE, "dt": _number("change-mode", tokens[1], float)}
    raise ConfigurationError(
        f"Invalid value for 'change-mode': expected toggle K | mobility DT, got {tokens}", key="change-mode"
    )


def merge_values(file_values: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """Flags override file values key by key."""
    merged = dict(file_values)
    for option in OPTIONS:
        flag_value = getattr(args, option.key.replace("-", "_"), None)
        if flag_value is not None:
            if option.key in merged:
                logger.info(f"Flag --{option.key} overrides the config file value {merged[option.key]!r}")
            merged[option.key] = flag_value
    return merged


def config_from_values(values: Dict[str, Any], require_scheme: bool = True) -> ExperimentConfig:
    if "scheme" not in values and not require_scheme:
        values = {**values, "scheme": Scheme.SGA.value}
    if "scheme" not in values:
        raise ConfigurationError("Missing required key 'scheme'", key="scheme")
    try:
        rwp_kwargs: Dict[str, Any] = {}
        if "nodes" in values:
            rwp_kwargs["node_count"] = _single("nodes", values["nodes"], int)
        if "area" in values:
            rwp_kwargs["width"], rwp_kwargs["height"] = _pair("area", values["area"], float)
        if "range" in values:
            rwp_kwargs["radio_range"] = _single("range", values["range"], float)
        if "speed" in values:
            rwp_kwargs["speed_min"], rwp_kwargs["speed_max"] = _pair("speed", values["speed"], float)
        if "pause" in values:
            rwp_kwargs["pause_time"] = _single("pause", values["pause"], float)
        if "cost-model" in values:
            rwp_kwargs.update(_cost_model(values["cost-model"]))
        rwp = RwpParams(**rwp_kwargs)

        generations = _single("gens", values["gens"], int) if "gens" in values else 10
        schedule_kwargs: Dict[str, Any] = {}
        if "change-mode" in values:
            schedule_kwargs.update(_change_mode(values["change-mode"]))
        if "change-interval" in values:
            schedule_kwargs["change_interval"] = _single("change-interval", values["change-interval"], int)
        interval = schedule_kwargs.get("change_interval", DynamicsSchedule.change_interval)
        if "changes" in values:
            schedule_kwargs["total_changes"] = _single("changes", values["changes"], int)
        else:
            schedule_kwargs["total_changes"] = generations // max(interval, 1)
        schedule = DynamicsSchedule(**schedule_kwargs)

        ga_kwargs: Dict[str, Any] = {}
        for key, name, kind in (("pop", "n", int), ("pc", "p_c", float), ("pm", "p_m", float),
                                ("rei", "r_ei", float), ("rri", "r_ri", float), ("pmi", "p_m_i", float),
                                ("memory-size", "m", int)):
            if key in values:
                ga_kwargs[name] = _single(key, values[key], kind)
        ga = GaParams(**ga_kwargs)
    except ParameterError as e:
        key = _FIELD_KEYS.get(e.field or "", e.field or "unknown")
        raise ConfigurationError(f"Invalid value for '{key}': {e}", key=key) from e

    return ExperimentConfig(
        rwp=rwp,
        schedule=schedule,
        ga=ga,
        schemes=_schemes(values["scheme"]),
        source=_single("source", values["source"], int) if "source" in values else 0,
        destination=_single("dest", values["dest"], int) if "dest" in values else rwp.node_count - 1,
        generations=generations,
        replications=_single("reps", values["reps"], int) if "reps" in values else 1,
        seed=_single("seed", values["seed"], int) if "seed" in values else 0,
        out=str(values.get("out", "results.csv")),
        trace_memory=_bool("trace-memory", values["trace-memory"]) if "trace-memory" in values else False,
        workers=_single("workers", values["workers"], int) if "workers" in values else 1,
        topology=str(values["topology"]) if values.get("topology") else None,
    )


# Flags owned by the CLI dispatcher in cli/main.py
DISPATCHER_FLAGS = ("--operation_mode", "--log-level")


def _reject_unknown(leftover: Sequence[str]) -> None:
    if not leftover:
        return
    flags = [token for token in leftover if token.startswith("-")]
    token = flags[0] if flags else leftover[0]
    key = token.split("=", 1)[0].lstrip("-")
    raise ConfigurationError(f"Unknown option '{token}'", key=key)


def parse_config(argv: Optional[Sequence[str]] = None, require_scheme: bool = True) -> ExperimentConfig:
    """
    Build an ExperimentConfig from flags plus an optional config file.

    Flags win over file values; file keys use the flag names without dashes
    (`pop = 20`, `cost-model = random 1 10`). Unknown keys and unknown flags
    are rejected.
    Without `require_scheme` a missing scheme falls back to sga.
    """
    parser = argparse.ArgumentParser(description="DSPRP GA experiment options", add_help=False)
    add_experiment_arguments(parser)
    for flag in DISPATCHER_FLAGS:
        parser.add_argument(flag, dest=f"dispatcher_{flag.lstrip('-').replace('-', '_')}", default=None)
    args, leftover = parser.parse_known_args(argv)
    _reject_unknown(leftover)
    file_values = _file_values(args.config) if args.config else {}
    return config_from_values(merge_values(file_values, args), require_scheme)
