"""
Recovery reports
================

    t_recovery = t_detection + t_cluster + t_startup + t_reinitialization

Every component is measured from trace timestamps of the mitigation:

    t_detection          injection            -> detection
    t_cluster            detection            -> first pod Running / policy applied
    t_startup            cluster ready        -> last application start
    t_reinitialization   application started  -> first delivered output of the
                                                  restored instance
"""

from dataclasses import dataclass, field

from mitigation.strategies import RecoveryStrategy
from monitoring.events import FailureEvent

COMPONENTS = ("t_detection", "t_cluster", "t_startup", "t_reinitialization")


@dataclass(frozen=True)
class RecoveryReport:
    failure: FailureEvent
    strategy: RecoveryStrategy
    t_detection: int
    t_cluster: int
    t_startup: int
    t_reinitialization: int
    t_recovery: int
    steps: tuple = field(default_factory=tuple)

    @classmethod
    def measure(cls, failure: FailureEvent, strategy: RecoveryStrategy, cluster_ready: int,
                app_started: int, first_output: int, steps=()) -> "RecoveryReport":
        return cls(
            failure=failure,
            strategy=strategy,
            t_detection=failure.t_detection,
            t_cluster=cluster_ready - failure.t_detected,
            t_startup=app_started - cluster_ready,
            t_reinitialization=first_output - app_started,
            t_recovery=first_output - failure.t_failure_actual,
            steps=tuple(steps),
        )

    @property
    def components(self) -> tuple:
        return tuple(getattr(self, name) for name in COMPONENTS)

    def identity_holds(self) -> bool:
        return sum(self.components) == self.t_recovery

    def to_record(self) -> dict:
        return {
            "workload": self.failure.workload,
            "failure_class": self.failure.failure_class.value,
            "t_failure_actual": self.failure.t_failure_actual,
            "t_detected": self.failure.t_detected,
            "strategy": self.strategy.value,
            "t_detection": self.t_detection,
            "t_cluster": self.t_cluster,
            "t_startup": self.t_startup,
            "t_reinit": self.t_reinitialization,
            "t_recovery": self.t_recovery,
            "steps": list(self.steps),
        }
