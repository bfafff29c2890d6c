"""
Scenario model
==============

A ScenarioSpec is everything one experiment needs: the workloads and their
fallback levels, the tasks handed to the task proxy, the monitor tree, the
mitigation trees per failure class, the failure injections and the cluster
parameters. Equality is structural, which is what the parse/serialize
round trip is checked against.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from behavior import BTNode
from cluster.cluster import ClusterParams
from monitoring.events import FailureClass
from monitoring.frequency import DEFAULT_WINDOW_MS
from monitoring.supervision import (
    DEFAULT_NOISE_SIGMA,
    DEFAULT_SENSOR_RATE,
    DEFAULT_SUSTAIN_MS,
    DEFAULT_TOLERANCE,
)
from workloads.profiles import LifecycleMode, WorkloadProfile

FORMAT_VERSION = 1
IDENTIFIER = re.compile(r"^[^\W\d][\w\-]*$")


def is_identifier(text: str) -> bool:
    return bool(IDENTIFIER.match(text))


def format_duration(ms: int) -> str:
    return f"{ms // 1000}s" if ms % 1000 == 0 and ms != 0 else f"{ms}ms"


class InjectionKind(Enum):
    DELETE_POD = "delete_pod"
    SILENT_REMAP = "silent_remap"


@dataclass(frozen=True)
class FailureInjection:
    at: int
    kind: InjectionKind
    target: str          # workload for delete_pod, topic for silent_remap


@dataclass(frozen=True)
class MitigationKey:
    failure_class: FailureClass
    workload: Optional[str] = None

    def __str__(self):
        base = self.failure_class.value
        return f"{base}@{self.workload}" if self.workload else base


@dataclass
class WorkloadDecl:
    name: str
    profile: WorkloadProfile
    fallback: LifecycleMode = LifecycleMode.SCRATCH
    fallback_from: Optional[str] = None
    managed: bool = False


@dataclass
class ScenarioSpec:
    name: str
    duration: int
    workloads: list = field(default_factory=list)
    tasks: list = field(default_factory=list)
    monitors: Optional[BTNode] = None
    mitigation: dict = field(default_factory=dict)       # MitigationKey -> BTNode
    injections: list = field(default_factory=list)
    cluster_params: ClusterParams = field(default_factory=ClusterParams)

    def workload(self, name: str) -> WorkloadDecl:
        for decl in self.workloads:
            if decl.name == name:
                return decl
        raise KeyError(name)

    def workload_names(self) -> list:
        return [d.name for d in self.workloads]

    def publisher_of(self, topic: str) -> Optional[str]:
        for decl in self.workloads:
            if topic in decl.profile.topics:
                return decl.name
        return None

    def mitigation_tree(self, failure_class: FailureClass, workload: str) -> Optional[BTNode]:
        return (self.mitigation.get(MitigationKey(failure_class, workload))
                or self.mitigation.get(MitigationKey(failure_class)))

    def dependency_closure(self, workload: str) -> list:
        """Transitive dependencies of a workload, nearest first."""
        seen, order, stack = set(), [], list(self.workload(workload).profile.dependencies)
        while stack:
            dep = stack.pop(0)
            if dep in seen:
                continue
            seen.add(dep)
            order.append(dep)
            stack.extend(self.workload(dep).profile.dependencies)
        return order


# ============================================================
# LEAF SCHEMAS
# ============================================================
# positional parameters, then keyword parameters with (type, default);
# a default of None makes the keyword mandatory.

@dataclass(frozen=True)
class LeafSchema:
    kind: str                     # "condition" | "action"
    positional: tuple = ()
    keywords: tuple = ()          # ((name, type, default), ...)


DURATION = "duration"

LEAF_SCHEMAS = {
    "frequency": LeafSchema("condition", ("topic",), (
        ("min_rate", float, None),
        ("window", DURATION, DEFAULT_WINDOW_MS),
    )),
    "supervision": LeafSchema("condition", ("commanded_topic", "observed_pose_topic"), (
        ("tolerance", float, DEFAULT_TOLERANCE),
        ("sustain", DURATION, DEFAULT_SUSTAIN_MS),
        ("noise", float, DEFAULT_NOISE_SIGMA),
        ("rate", float, DEFAULT_SENSOR_RATE),
    )),
    "task_assigned": LeafSchema("condition", ("workload",)),
    "restart_scratch": LeafSchema("action", ("workload",)),
    "connect_fallback": LeafSchema("action", ("workload",)),
    "handover": LeafSchema("action", ("workload",)),
    "promote": LeafSchema("action", ("workload",)),
    "recover_dependency": LeafSchema("action", ("workload",)),
}

# positional parameter name -> what it must resolve to
REFERENCE_PARAMS = {
    "topic": "topic",
    "commanded_topic": "topic",
    "workload": "workload",
}
