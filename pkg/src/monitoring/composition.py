"""
Monitor composition
===================

Task-dependent monitors: a monitored subtree only counts while its guard holds,

    conditional(guard, monitored) = Fallback(Inverter(guard), monitored)

With the guard failing (e.g. no navigation task assigned) the composition is
vacuously Success, so a silent velocity topic on a parked robot raises no alarm.
"""

from behavior import BTNode, NodeKind, TickStatus, condition, fallback, inverter, walk
from monitoring.events import FailureClass
from monitoring.frequency import frequency_predicate
from monitoring.supervision import supervision_predicate


def conditional_monitor(guard: BTNode, monitored: BTNode, name: str = None) -> BTNode:
    name = name or f"{monitored.name}_when_{guard.name}"
    return fallback(name, inverter(f"{name}_guard", guard), monitored)


def task_assigned(workload: str, name: str = None) -> BTNode:
    return condition(name or f"{workload}_task_assigned", "task_assigned", workload=workload)


def task_assigned_predicate(node: BTNode, ctx) -> TickStatus:
    proxy = ctx.blackboard["proxy"]
    return TickStatus.SUCCESS if proxy.has_assigned(node.arg("workload")) else TickStatus.FAILURE


MONITOR_PREDICATES = {
    "frequency": frequency_predicate,
    "supervision": supervision_predicate,
    "task_assigned": task_assigned_predicate,
}

FAILURE_CLASS_OF = {
    "frequency": FailureClass.TOPIC_SILENCE,
    "supervision": FailureClass.BEHAVIOR_DISCREPANCY,
}


def watched_topic(node: BTNode) -> str:
    """Topic whose publisher is blamed when this monitor condition fails."""
    if node.ref == "supervision":
        return node.arg("commanded_topic")
    return node.arg("topic")


def monitor_conditions(tree: BTNode) -> list:
    """Every failure-reporting condition in a monitor tree, in tree order."""
    return [n for n in walk(tree) if n.kind is NodeKind.CONDITION and n.ref in FAILURE_CLASS_OF]
