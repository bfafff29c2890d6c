"""Failure detection: topic-frequency monitors, conditional composition, external supervision."""

from monitoring.composition import (
    FAILURE_CLASS_OF,
    MONITOR_PREDICATES,
    conditional_monitor,
    monitor_conditions,
    task_assigned,
    watched_topic,
)
from monitoring.events import MONITOR_PERIOD_MS, FailureClass, FailureEvent
from monitoring.frequency import FrequencyMonitorSpec, TopicLog, frequency_condition
from monitoring.supervision import (
    MarkerSensor,
    SupervisionSpec,
    estimate_observed_velocity,
    supervision_condition,
)

__all__ = [
    "FAILURE_CLASS_OF", "MONITOR_PREDICATES", "conditional_monitor", "monitor_conditions",
    "task_assigned", "watched_topic",
    "MONITOR_PERIOD_MS", "FailureClass", "FailureEvent",
    "FrequencyMonitorSpec", "TopicLog", "frequency_condition",
    "MarkerSensor", "SupervisionSpec", "estimate_observed_velocity", "supervision_condition",
]
