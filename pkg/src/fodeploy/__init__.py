"""Deployment synthesis and degradation analysis for fail-operational platforms."""

from importlib import resources

from .constraints import (
    ClusterPlacement,
    DeploymentConfig,
    SlaveMode,
    check_config,
    feature_availability,
    priority_sum,
    slave_allowed,
    used_time_budget,
)
from .model import (
    FaultScenario,
    ModelValidationError,
    SchemaError,
    SystemModel,
    Violation,
    check_model,
    derive_cluster_properties,
    derive_clusters,
    validate_model,
)
from .pag import analyze, build_pag
from .report import degradation_report, to_dot
from .smtlib import emit_smtlib
from .solver import SolveRequest, SolveResult, check_target, max_priority_cap, solve

__version__ = "0.1.0"


def example_path(name: str = "example_model.json") -> str:
    """Path of a bundled fixture: ``example_model.json`` or ``example_initial.json``."""
    return str(resources.files(__package__) / "data" / name)
