"""Failure classes and detected failure events."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

MONITOR_PERIOD_MS = 100


class FailureClass(Enum):
    TOPIC_SILENCE = "TopicSilence"
    BEHAVIOR_DISCREPANCY = "BehaviorDiscrepancy"


@dataclass(frozen=True)
class FailureEvent:
    workload: str
    failure_class: FailureClass
    t_failure_actual: int     # from the injection log, evaluation only
    t_detected: int
    condition: Optional[str] = None

    def __post_init__(self):
        if self.t_detected < self.t_failure_actual:
            raise ValueError(
                f"failure of '{self.workload}' detected at {self.t_detected} ms "
                f"before it happened ({self.t_failure_actual} ms)")

    @property
    def t_detection(self) -> int:
        return self.t_detected - self.t_failure_actual

    def to_record(self) -> dict:
        return {
            "workload": self.workload,
            "failure_class": self.failure_class.value,
            "t_failure_actual": self.t_failure_actual,
            "t_detected": self.t_detected,
            "condition": self.condition,
        }
