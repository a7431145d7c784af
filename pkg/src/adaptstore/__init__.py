"""Deterministic simulation testbed for a self-adaptive web store."""

from adaptstore.adaptation import MapeEngine, QoSPolicy
from adaptstore.scenarios import (
    ScenarioReport,
    ScenarioScript,
    builtin_scenario,
    run_scenario,
)
from adaptstore.simnet import Endpoint, FaultSpec, Simulator
from adaptstore.variability import (
    AuthMode,
    ConfigDelta,
    Configuration,
    ImageSource,
    PersistenceSource,
    RecommenderMode,
    ValidationResult,
    canonical_level,
    complete_request,
    diff,
    enumerate_valid,
    validate,
)
from adaptstore.world import World

__all__ = [
    "AuthMode",
    "ConfigDelta",
    "Configuration",
    "Endpoint",
    "FaultSpec",
    "ImageSource",
    "MapeEngine",
    "PersistenceSource",
    "QoSPolicy",
    "RecommenderMode",
    "ScenarioReport",
    "ScenarioScript",
    "Simulator",
    "ValidationResult",
    "World",
    "builtin_scenario",
    "canonical_level",
    "complete_request",
    "diff",
    "enumerate_valid",
    "run_scenario",
    "validate",
]

__version__ = "0.1.0"
