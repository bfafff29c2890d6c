"""
Event queue and event trace
===========================

The queue orders callbacks by (time, priority, insertion sequence), so runs are
fully deterministic. Priorities fix the order of the periodic processes that
share a timestamp:

    INJECT < PLANT < CLUSTER < WORKLOAD < SENSOR < MONITOR < MITIGATION < SAMPLE

i.e. a failure injected at t is visible to the workloads at t, the plant is
integrated up to t before any controller reads it, and monitors see every
message published at t.
"""

import heapq
import json
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable

logger = logging.getLogger(__name__)


class Priority(IntEnum):
    INJECT = 0
    PLANT = 5
    CLUSTER = 10
    WORKLOAD = 20
    SENSOR = 40
    MONITOR = 50
    MITIGATION = 60
    SAMPLE = 70


class EventQueue:
    def __init__(self):
        self._heap = []
        self._seq = 0
        self.now = 0

    def schedule(self, t: int, priority: Priority, callback: Callable, *args) -> None:
        t = int(t)
        if t < self.now:
            raise ValueError(f"cannot schedule at {t} ms, clock is at {self.now} ms")
        heapq.heappush(self._heap, (t, int(priority), self._seq, callback, args))
        self._seq += 1

    def run_until(self, end: int) -> None:
        """Process every event with t < end, in order."""
        while self._heap and self._heap[0][0] < end:
            t, _, _, callback, args = heapq.heappop(self._heap)
            self.now = t
            callback(*args)
        self.now = max(self.now, end)

    def __len__(self):
        return len(self._heap)


@dataclass(frozen=True)
class TraceRecord:
    t: int
    kind: str
    payload: dict

    def to_line(self) -> str:
        body = json.dumps(self.payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return f"{self.t}\t{self.kind}\t{body}"


class EventTrace:
    """Append-only, time-ordered record of everything that happened in a run."""

    def __init__(self):
        self._records = []

    def record(self, t: int, kind: str, /, **payload) -> TraceRecord:
        """Payload keys may reuse the names t and kind; they land in the JSON body."""
        if self._records and t < self._records[-1].t:
            raise ValueError(f"trace time went backwards: {t} < {self._records[-1].t}")
        rec = TraceRecord(int(t), kind, payload)
        self._records.append(rec)
        if kind in ("warning", "fault", "escalation"):
            logger.debug("t=%d %s %s", t, kind, payload)
        return rec

    @property
    def records(self) -> list:
        return list(self._records)

    def of_kind(self, *kinds: str) -> list:
        return [r for r in self._records if r.kind in kinds]

    def to_lines(self) -> list:
        return [r.to_line() for r in self._records]

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in self.to_lines():
                f.write(line + "\n")

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(self._records)
