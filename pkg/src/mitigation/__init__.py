"""Failure mitigation: recovery strategies, step actions, the controller and recovery reports."""

from mitigation.controller import MITIGATION_PREDICATES, Mitigation, MitigationController
from mitigation.report import COMPONENTS, RecoveryReport
from mitigation.steps import STEP_ACTIONS
from mitigation.strategies import (
    STRATEGY_ORDER,
    RecoveryStrategy,
    apply_strategy,
    default_tree,
    mitigation_targets,
    strategies_for,
)

__all__ = [
    "MITIGATION_PREDICATES", "Mitigation", "MitigationController",
    "COMPONENTS", "RecoveryReport",
    "STEP_ACTIONS",
    "STRATEGY_ORDER", "RecoveryStrategy", "apply_strategy", "default_tree",
    "mitigation_targets", "strategies_for",
]
