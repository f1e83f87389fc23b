"""Session configuration: one dataclass, a strict YAML mapping, and snapshots.

A session is fully described by SessionConfig.  The YAML file mirrors its
structure section by section; unknown keys anywhere are hard errors so a
typo cannot silently fall back to a default.  ``config_to_dict`` produces
the behavioral snapshot embedded in log headers: it deliberately excludes
output paths, so two runs of the same configuration produce byte-identical
logs regardless of where they write.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Optional

import yaml

from .cbf import EcbfGains, validate_gains
from .dynamics import DynamicsParams, InputMap
from .paradigm import Condition, ParadigmConfig
from .world import EnvironmentParams


class ConfigError(RuntimeError):
    """The configuration cannot be used as given."""


@dataclass(frozen=True)
class SessionConfig:
    """Everything a trial depends on.

    ``scenario`` carries an explicit environment (the serialized form) and
    wins over ``env_params`` generation when set.  ``operator`` is a policy
    spec string; ``penalty`` parameterizes the relaxation fallback;
    ``cull_radius`` bounds which obstacles enter the projection untested.
    """

    condition: Condition = Condition.SA
    seed: int = 0
    operator: str = "waypoint"
    env_params: EnvironmentParams = dataclasses.field(default_factory=EnvironmentParams)
    scenario: Optional[dict] = None
    dynamics: DynamicsParams = dataclasses.field(default_factory=DynamicsParams)
    input_map: InputMap = dataclasses.field(default_factory=InputMap)
    gains: EcbfGains = dataclasses.field(default_factory=EcbfGains)
    paradigm: ParadigmConfig = dataclasses.field(default_factory=ParadigmConfig)
    wall_constraints: bool = False
    cull_radius: float = 10.0
    tick_cap: int = 60_000
    crash_depth: float = 0.05
    hover_speed_max: float = 0.5
    penalty: float = 1e4
    out_path: Optional[str] = None

    def validate(self) -> None:
        validate_gains(self.gains)
        if self.tick_cap < 1:
            raise ConfigError(f"tick_cap must be at least 1, got {self.tick_cap}")
        if not self.cull_radius > 0.0:
            raise ConfigError(f"cull_radius must be positive, got {self.cull_radius}")
        if not self.penalty > 0.0:
            raise ConfigError(f"penalty must be positive, got {self.penalty}")
        if not self.crash_depth > 0.0:
            raise ConfigError(f"crash_depth must be positive, got {self.crash_depth}")
        if not self.hover_speed_max > 0.0:
            raise ConfigError(
                f"hover_speed_max must be positive, got {self.hover_speed_max}"
            )


_SESSION_KEYS = (
    "wall_constraints", "cull_radius", "tick_cap", "crash_depth",
    "hover_speed_max", "penalty",
)


def _build_dataclass(cls, obj: Any, path: str):
    """Construct a params dataclass from a mapping, rejecting unknown keys."""
    if obj is None:
        return cls()
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(obj).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(obj) - names
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    try:
        return cls(**obj)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from None


def config_from_dict(d: dict, base: Optional[SessionConfig] = None) -> SessionConfig:
    """Build a SessionConfig from a parsed mapping, strictly."""
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise ConfigError(f"config root must be a mapping, got {type(d).__name__}")
    known = {
        "condition", "seed", "operator", "out",
        "dynamics", "input_map", "gains", "paradigm", "environment", "session",
    }
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")

    cfg = base if base is not None else SessionConfig()
    updates: dict[str, Any] = {}

    if "condition" in d:
        try:
            updates["condition"] = Condition.parse(str(d["condition"]))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    if "seed" in d:
        if not isinstance(d["seed"], int) or isinstance(d["seed"], bool):
            raise ConfigError(f"seed must be an integer, got {d['seed']!r}")
        updates["seed"] = d["seed"]
    if "operator" in d:
        updates["operator"] = str(d["operator"])
    if "out" in d:
        updates["out_path"] = None if d["out"] is None else str(d["out"])

    if "dynamics" in d:
        updates["dynamics"] = _build_dataclass(DynamicsParams, d["dynamics"], "dynamics")
    if "input_map" in d:
        updates["input_map"] = _build_dataclass(InputMap, d["input_map"], "input_map")
    if "gains" in d:
        updates["gains"] = _build_dataclass(EcbfGains, d["gains"], "gains")
    if "paradigm" in d:
        updates["paradigm"] = _build_dataclass(ParadigmConfig, d["paradigm"], "paradigm")

    if "environment" in d:
        env = d["environment"]
        if not isinstance(env, dict):
            raise ConfigError("environment: expected a mapping")
        env = dict(env)
        scenario = env.pop("scenario", None)
        if scenario is not None and env:
            raise ConfigError(
                "environment: scenario excludes generation parameters "
                f"(also given: {sorted(env)})"
            )
        if scenario is not None:
            if isinstance(scenario, str):
                with open(scenario, "r", encoding="utf-8") as fh:
                    scenario = yaml.safe_load(fh)
            if not isinstance(scenario, dict):
                raise ConfigError("environment.scenario: expected a mapping or a path")
            updates["scenario"] = scenario
        else:
            updates["env_params"] = _build_dataclass(
                EnvironmentParams, env, "environment"
            )

    if "session" in d:
        sess = d["session"]
        if not isinstance(sess, dict):
            raise ConfigError("session: expected a mapping")
        unknown = set(sess) - set(_SESSION_KEYS)
        if unknown:
            raise ConfigError(f"session: unknown keys {sorted(unknown)}")
        updates.update(sess)

    try:
        return dataclasses.replace(cfg, **updates)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None


def load_config(path, base: Optional[SessionConfig] = None) -> SessionConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from None
    return config_from_dict(d, base)


def config_to_dict(cfg: SessionConfig) -> dict:
    """Behavioral snapshot for log headers; paths are intentionally absent."""
    d = {
        "condition": cfg.condition.value.lower(),
        "seed": cfg.seed,
        "operator": cfg.operator,
        "dynamics": dataclasses.asdict(cfg.dynamics),
        "input_map": dataclasses.asdict(cfg.input_map),
        "gains": dataclasses.asdict(cfg.gains),
        "paradigm": dataclasses.asdict(cfg.paradigm),
        "session": {k: getattr(cfg, k) for k in _SESSION_KEYS},
    }
    if cfg.scenario is not None:
        d["environment"] = {"scenario": cfg.scenario}
    else:
        d["environment"] = dataclasses.asdict(cfg.env_params)
    return d


def config_from_header(header: dict) -> SessionConfig:
    """Rebuild the SessionConfig a log was produced with."""
    return config_from_dict(header)
