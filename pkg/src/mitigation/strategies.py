"""
Recovery strategies
===================

Restart from scratch, or switch to a fallback instance held at one of three
initialization levels. The further the fallback is initialized, the less of
the recovery sequence (cluster, startup, re-initialization) remains, and the
more CPU the idle fallback costs.
"""

import copy
import logging
from enum import Enum

from behavior import BTNode, action, sequence
from monitoring.events import FailureClass
from scenario.model import MitigationKey, ScenarioSpec
from workloads.profiles import LifecycleMode, WorkloadKind

logger = logging.getLogger(__name__)


class RecoveryStrategy(Enum):
    RESTART_SCRATCH = "restart_scratch"
    FALLBACK_POD_STARTED = "fallback_pod_started"
    FALLBACK_INITIALIZED = "fallback_initialized"
    FALLBACK_SHADOW_EXECUTION = "fallback_shadow_execution"

    @property
    def level(self) -> LifecycleMode:
        return LEVEL_OF[self]

    @property
    def applicable_kinds(self) -> frozenset:
        return APPLICABLE_KINDS[self]

    def applies_to(self, kind: WorkloadKind) -> bool:
        return kind in APPLICABLE_KINDS[self]

    @classmethod
    def for_level(cls, level: LifecycleMode) -> "RecoveryStrategy":
        for strategy, mode in LEVEL_OF.items():
            if mode is level:
                return strategy
        raise ValueError(f"no strategy for level {level.value}")

    @classmethod
    def parse(cls, text: str) -> "RecoveryStrategy":
        text = text.strip().lower()
        return cls(STRATEGY_ALIASES.get(text, text))


LEVEL_OF = {
    RecoveryStrategy.RESTART_SCRATCH: LifecycleMode.SCRATCH,
    RecoveryStrategy.FALLBACK_POD_STARTED: LifecycleMode.POD_STARTED,
    RecoveryStrategy.FALLBACK_INITIALIZED: LifecycleMode.APP_INITIALIZED,
    RecoveryStrategy.FALLBACK_SHADOW_EXECUTION: LifecycleMode.SHADOW_EXECUTION,
}

_ALL_KINDS = frozenset(WorkloadKind)
APPLICABLE_KINDS = {
    RecoveryStrategy.RESTART_SCRATCH: _ALL_KINDS,
    RecoveryStrategy.FALLBACK_POD_STARTED: _ALL_KINDS,
    RecoveryStrategy.FALLBACK_INITIALIZED: frozenset({WorkloadKind.NAVIGATION, WorkloadKind.LOCALIZATION}),
    RecoveryStrategy.FALLBACK_SHADOW_EXECUTION: _ALL_KINDS,
}

STRATEGY_ALIASES = {
    "scratch": "restart_scratch",
    "pod_started": "fallback_pod_started",
    "uninitialized": "fallback_pod_started",
    "initialized": "fallback_initialized",
    "app_initialized": "fallback_initialized",
    "shadow": "fallback_shadow_execution",
    "shadow_execution": "fallback_shadow_execution",
}

# slowest to fastest
STRATEGY_ORDER = (
    RecoveryStrategy.RESTART_SCRATCH,
    RecoveryStrategy.FALLBACK_POD_STARTED,
    RecoveryStrategy.FALLBACK_INITIALIZED,
    RecoveryStrategy.FALLBACK_SHADOW_EXECUTION,
)


def strategies_for(kind: WorkloadKind) -> list:
    return [s for s in STRATEGY_ORDER if s.applies_to(kind)]


def default_tree(strategy: RecoveryStrategy, workload: str) -> BTNode:
    """The shipped mitigation tree for a strategy."""
    first = (action(f"restart_{workload}", "restart_scratch", workload=workload)
             if strategy is RecoveryStrategy.RESTART_SCRATCH
             else action(f"connect_{workload}", "connect_fallback", workload=workload))
    return sequence(
        f"recover_{workload}",
        action(f"dependencies_{workload}", "recover_dependency", workload=workload),
        first,
        action(f"handover_{workload}", "handover", workload=workload),
        action(f"promote_{workload}", "promote", workload=workload),
    )


def mitigation_targets(spec: ScenarioSpec) -> list:
    """Workloads the scenario injects failures into (directly or through a topic)."""
    targets = []
    for injection in spec.injections:
        workload = injection.target if injection.target in spec.workload_names() \
            else spec.publisher_of(injection.target)
        if workload and workload not in targets:
            targets.append(workload)
    return targets


def apply_strategy(spec: ScenarioSpec, strategy: RecoveryStrategy) -> ScenarioSpec:
    """
    Copy of the scenario that mitigates its injected workloads with `strategy`.

    Raises:
        ValueError: the strategy does not apply to one of the target kinds.
    """
    spec = copy.deepcopy(spec)
    for workload in mitigation_targets(spec):
        decl = spec.workload(workload)
        if not strategy.applies_to(decl.profile.kind):
            raise ValueError(f"{strategy.value} does not apply to {decl.profile.kind.value} workload '{workload}'")
        decl.fallback = strategy.level
        decl.fallback_from = None
        for failure_class in FailureClass:
            spec.mitigation[MitigationKey(failure_class, workload)] = default_tree(strategy, workload)
    return spec
