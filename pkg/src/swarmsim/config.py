"""Experiment configuration: JSON-loadable, strictly validated."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

from .errors import ConfigError
from .safety import SafetyParams

# Controllers with S at or above this value may run with the filter off.
BYPASS_THRESHOLD = 0.999


@dataclass
class ExperimentConfig:
    robots: int = 4
    duration: float = 30.0
    dt: float = 0.01
    control_period_ticks: int = 5
    safety: SafetyParams = field(default_factory=SafetyParams)
    controller: str = "consensus"
    controller_opts: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    filter: bool = True
    robot_radius: float = 0.02
    out_dir: str | None = None

    def __post_init__(self):
        if self.robots < 1:
            raise ConfigError("robots must be >= 1")
        if not (self.duration >= 0):
            raise ConfigError("duration must be >= 0")
        if not (self.dt > 0):
            raise ConfigError("dt must be positive")
        if self.control_period_ticks < 1:
            raise ConfigError("control_period_ticks must be >= 1")
        if not (self.robot_radius > 0):
            raise ConfigError("robot_radius must be positive")

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.dt))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["safety"] = {
            "d_s": self.safety.d_s,
            "gamma": self.safety.gamma,
            "alpha": self.safety.alpha,
            "bounds": list(self.safety.bounds),
        }
        return d

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        known = {
            "robots", "duration", "dt", "control_period_ticks", "safety",
            "controller", "controller_opts", "seed", "filter", "robot_radius",
            "out_dir",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "safety" in data:
            s = dict(data["safety"])
            s_unknown = set(s) - {"d_s", "gamma", "alpha", "bounds"}
            if s_unknown:
                raise ConfigError(f"unknown safety keys: {sorted(s_unknown)}")
            if "bounds" in s:
                s["bounds"] = tuple(s["bounds"])
            data["safety"] = SafetyParams(**s)
        return ExperimentConfig(**data)

    @staticmethod
    def load(path: str) -> "ExperimentConfig":
        with open(path) as f:
            return ExperimentConfig.from_dict(json.load(f))

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
