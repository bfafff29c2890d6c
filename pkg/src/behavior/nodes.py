"""
Behavior tree nodes
===================

Trees are plain dataclasses: composites (sequence, fallback, parallel),
decorators (inverter, retry, timeout) and leaves (condition, action).

Leaves carry an id (`ref`) that is resolved at tick time against the
predicate/action registries in the TickContext, plus typed arguments.
Decorators keep a little bookkeeping (retry attempts, timeout start) that is
excluded from equality, so two trees compare equal iff they are the same
structure.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Optional


class TickStatus(Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    RUNNING = "Running"


class NodeKind(Enum):
    SEQUENCE = "sequence"
    FALLBACK = "fallback"
    PARALLEL = "parallel"
    CONDITION = "condition"
    ACTION = "action"
    INVERTER = "inverter"
    RETRY = "retry"
    TIMEOUT = "timeout"

    @property
    def is_composite(self) -> bool:
        return self in COMPOSITES

    @property
    def is_decorator(self) -> bool:
        return self in DECORATORS

    @property
    def is_leaf(self) -> bool:
        return self in LEAVES


COMPOSITES = frozenset({NodeKind.SEQUENCE, NodeKind.FALLBACK, NodeKind.PARALLEL})
DECORATORS = frozenset({NodeKind.INVERTER, NodeKind.RETRY, NodeKind.TIMEOUT})
LEAVES = frozenset({NodeKind.CONDITION, NodeKind.ACTION})


@dataclass
class BTNode:
    kind: NodeKind
    name: str
    children: tuple = ()
    threshold: Optional[int] = None      # parallel
    max_attempts: Optional[int] = None   # retry
    budget: Optional[int] = None         # timeout, ms
    ref: Optional[str] = None            # condition predicate id / action id
    args: tuple = ()                     # ((key, value), ...) in schema order

    # decorator bookkeeping, not part of the structure
    attempts: int = field(default=0, compare=False, repr=False)
    running_since: Optional[int] = field(default=None, compare=False, repr=False)
    last_tick: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.children = tuple(self.children)
        self.args = tuple((str(k), v) for k, v in self.args)

    def arg(self, key: str, default: Any = None) -> Any:
        for k, v in self.args:
            if k == key:
                return v
        return default

    @property
    def arg_map(self) -> dict:
        return dict(self.args)

    def __str__(self):
        return f"{self.kind.value} '{self.name}'"


@dataclass(frozen=True)
class ValidationIssue:
    node: str
    message: str

    def __str__(self):
        return f"{self.node}: {self.message}"


# ============================================================
# CONSTRUCTORS
# ============================================================

def sequence(name: str, *children: BTNode) -> BTNode:
    return BTNode(NodeKind.SEQUENCE, name, children)


def fallback(name: str, *children: BTNode) -> BTNode:
    return BTNode(NodeKind.FALLBACK, name, children)


def parallel(name: str, threshold: int, *children: BTNode) -> BTNode:
    return BTNode(NodeKind.PARALLEL, name, children, threshold=threshold)


def inverter(name: str, child: BTNode) -> BTNode:
    return BTNode(NodeKind.INVERTER, name, (child,))


def retry(name: str, max_attempts: int, child: BTNode) -> BTNode:
    return BTNode(NodeKind.RETRY, name, (child,), max_attempts=max_attempts)


def timeout(name: str, budget: int, child: BTNode) -> BTNode:
    return BTNode(NodeKind.TIMEOUT, name, (child,), budget=budget)


def condition(name: str, ref: str, **args: Any) -> BTNode:
    return BTNode(NodeKind.CONDITION, name, ref=ref, args=tuple(args.items()))


def action(name: str, ref: str, **args: Any) -> BTNode:
    return BTNode(NodeKind.ACTION, name, ref=ref, args=tuple(args.items()))


# ============================================================
# STRUCTURE
# ============================================================

def walk(tree: BTNode) -> Iterator[BTNode]:
    """Depth-first, left-to-right, pre-order."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def validate(tree: BTNode) -> list:
    """
    Check the structural invariants of a tree.

    Returns:
        List of ValidationIssue, empty iff the tree is well formed.
    """
    issues = []
    seen = set()

    for node in walk(tree):
        n = len(node.children)

        if node.name in seen:
            issues.append(ValidationIssue(node.name, "duplicate node name"))
        seen.add(node.name)

        if node.kind.is_composite and n < 1:
            issues.append(ValidationIssue(
                node.name, f"{node.kind.value.capitalize()} requires at least 1 child"))
        elif node.kind.is_leaf and n != 0:
            issues.append(ValidationIssue(
                node.name, f"{node.kind.value.capitalize()} takes no children, has {n}"))
        elif node.kind.is_decorator and n != 1:
            issues.append(ValidationIssue(
                node.name, f"{node.kind.value.capitalize()} requires exactly 1 child, has {n}"))

        if node.kind is NodeKind.PARALLEL:
            if node.threshold is None or not 1 <= node.threshold <= n:
                issues.append(ValidationIssue(
                    node.name, f"success threshold {node.threshold} out of range [1, {n}]"))
        if node.kind is NodeKind.RETRY and (node.max_attempts is None or node.max_attempts < 1):
            issues.append(ValidationIssue(node.name, f"max_attempts must be >= 1, got {node.max_attempts}"))
        if node.kind is NodeKind.TIMEOUT and (node.budget is None or node.budget <= 0):
            issues.append(ValidationIssue(node.name, f"budget must be > 0 ms, got {node.budget}"))
        if node.kind.is_leaf and not node.ref:
            issues.append(ValidationIssue(node.name, "leaf has no predicate/action id"))

    return issues


def reset(tree: BTNode) -> None:
    """Forget retry counters, timeout start times and the last tick time."""
    for node in walk(tree):
        node.attempts = 0
        node.running_since = None
        node.last_tick = None
