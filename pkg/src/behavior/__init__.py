"""Behavior-tree substrate shared by monitoring and mitigation."""

from behavior.nodes import (
    BTNode,
    NodeKind,
    TickStatus,
    ValidationIssue,
    action,
    condition,
    fallback,
    inverter,
    parallel,
    reset,
    retry,
    sequence,
    timeout,
    validate,
    walk,
)
from behavior.engine import TickContext, tick

__all__ = [
    "BTNode",
    "NodeKind",
    "TickContext",
    "TickStatus",
    "ValidationIssue",
    "action",
    "condition",
    "fallback",
    "inverter",
    "parallel",
    "reset",
    "retry",
    "sequence",
    "tick",
    "timeout",
    "validate",
    "walk",
]
