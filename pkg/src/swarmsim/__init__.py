"""Deterministic 2-D multi-robot simulation testbed with barrier-certificate
safety filtering, reference swarm controllers, and simulation-based
controller verification."""

from .config import BYPASS_THRESHOLD, ExperimentConfig
from .errors import ConfigError, InputError
from .safety import SafetyFilter, SafetyParams

__all__ = [
    "BYPASS_THRESHOLD",
    "ConfigError",
    "ExperimentConfig",
    "InputError",
    "SafetyFilter",
    "SafetyParams",
]

__version__ = "0.1.0"
