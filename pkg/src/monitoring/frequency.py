"""
Introspective topic-frequency monitors
======================================

A frequency condition counts the messages the monitor received on a topic in
the trailing window [t - window, t] and fails when there are fewer than
floor(min_rate * window).
"""

import bisect
import logging
import math
from dataclasses import dataclass

from behavior import BTNode, TickStatus, condition

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_MS = 500


@dataclass(frozen=True)
class FrequencyMonitorSpec:
    topic: str
    min_rate: float                  # Hz
    window: int = DEFAULT_WINDOW_MS

    def __post_init__(self):
        if self.min_rate <= 0:
            raise ValueError(f"min_rate must be > 0 Hz, got {self.min_rate}")
        if self.window <= 0:
            raise ValueError(f"window must be > 0 ms, got {self.window}")

    @property
    def required_count(self) -> int:
        return math.floor(self.min_rate * self.window / 1000.0 + 1e-9)


class TopicLog:
    """What the monitor has observed, per topic, in arrival order."""

    def __init__(self):
        self._times = {}
        self._messages = {}

    def add(self, message) -> None:
        self._times.setdefault(message.topic, []).append(message.t)
        self._messages.setdefault(message.topic, []).append(message)

    def count_in_window(self, topic: str, start: int, end: int) -> int:
        times = self._times.get(topic, [])
        return bisect.bisect_right(times, end) - bisect.bisect_left(times, start)

    def last(self, topic: str):
        messages = self._messages.get(topic)
        return messages[-1] if messages else None

    def recent(self, topic: str, n: int, until: int) -> list:
        times = self._times.get(topic, [])
        hi = bisect.bisect_right(times, until)
        return self._messages.get(topic, [])[max(0, hi - n):hi]

    def topics(self) -> list:
        return sorted(self._times)

    def trim(self, before: int, keep: int = 1) -> None:
        """Forget messages older than `before`, holding on to the newest `keep` per topic."""
        for topic, times in self._times.items():
            cut = min(bisect.bisect_left(times, before), max(0, len(times) - keep))
            if cut:
                del times[:cut]
                del self._messages[topic][:cut]


def frequency_condition(spec: FrequencyMonitorSpec, name: str = None) -> BTNode:
    return condition(name or f"{spec.topic}_rate", "frequency",
                     topic=spec.topic, min_rate=float(spec.min_rate), window=int(spec.window))


def spec_of(node: BTNode) -> FrequencyMonitorSpec:
    return FrequencyMonitorSpec(node.arg("topic"), node.arg("min_rate"), node.arg("window", DEFAULT_WINDOW_MS))


def frequency_predicate(node: BTNode, ctx) -> TickStatus:
    spec = spec_of(node)
    now = ctx.sim_time
    if now < spec.window:
        return TickStatus.SUCCESS          # not a full window of history yet

    log = ctx.blackboard["topics"]
    count = log.count_in_window(spec.topic, now - spec.window, now)
    if count >= spec.required_count:
        return TickStatus.SUCCESS

    ctx.blackboard.setdefault("failing", []).append(node)
    return TickStatus.FAILURE
