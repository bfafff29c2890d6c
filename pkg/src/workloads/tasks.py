"""
Tasks and the task proxy
========================

A TaskRequest is the high-level job a workload executes (drive through goal
poses, move the arm through joint targets). Clients hand tasks to the
TaskProxy, never to a workload instance directly: the proxy keeps the request
alive while the workload dies and is recovered, and re-attaches it to whatever
instance is Active afterwards.
"""

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from errors import ScenarioFault, UnknownTaskError

logger = logging.getLogger(__name__)


class TaskKind(Enum):
    NAVIGATE_TO_GOALS = "navigate"
    MOVE_ARM_TO_TARGETS = "move_arm"


class TaskStatus(Enum):
    PENDING = "Pending"
    ACTIVE = "Active"
    DONE = "Done"
    INTERRUPTED = "Interrupted"


ALLOWED_TRANSITIONS = {
    (TaskStatus.PENDING, TaskStatus.ACTIVE),
    (TaskStatus.ACTIVE, TaskStatus.DONE),
    (TaskStatus.ACTIVE, TaskStatus.INTERRUPTED),
    (TaskStatus.INTERRUPTED, TaskStatus.ACTIVE),
}


@dataclass
class TaskRequest:
    id: str
    workload: str
    kind: TaskKind
    goals: tuple                        # 2D poses (x, y, theta) or joint vectors
    submit_at: int = 0
    status: TaskStatus = TaskStatus.PENDING

    def __post_init__(self):
        self.goals = tuple(tuple(float(c) for c in goal) for goal in self.goals)
        if not self.goals:
            raise ValueError(f"task '{self.id}' has an empty goal list")

    def transition(self, new_status: TaskStatus) -> None:
        if (self.status, new_status) not in ALLOWED_TRANSITIONS:
            raise ScenarioFault(
                f"task '{self.id}': illegal transition {self.status.value} -> {new_status.value}")
        self.status = new_status

    def fresh_copy(self) -> "TaskRequest":
        return TaskRequest(self.id, self.workload, self.kind, self.goals, self.submit_at)


# dispatcher(task) -> True when an Active instance accepted the task
Dispatcher = Callable[[TaskRequest], bool]
Listener = Callable[[TaskRequest], None]


class TaskProxy:
    """
    Holds task requests per workload, FIFO, across workload deaths.

    Only the head of a workload's queue is ever Active or Interrupted; later
    submissions wait as Pending until the head is Done.
    """

    def __init__(self, dispatcher: Dispatcher, listener: Optional[Listener] = None):
        self._dispatch = dispatcher
        self._listener = listener
        self._tasks = {}
        self._queues = {}

    def submit(self, task: TaskRequest) -> TaskStatus:
        if task.id in self._tasks:
            raise ValueError(f"task '{task.id}' already submitted")
        self._tasks[task.id] = task
        queue = self._queues.setdefault(task.workload, deque())
        queue.append(task)
        if queue[0] is task:
            self._try_start(task)
        else:
            logger.debug("task %s queued behind %s", task.id, queue[0].id)
        return task.status

    def status(self, task_id: str) -> TaskStatus:
        try:
            return self._tasks[task_id].status
        except KeyError:
            raise UnknownTaskError(task_id) from None

    def get(self, task_id: str) -> TaskRequest:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise UnknownTaskError(task_id) from None

    def current(self, workload: str) -> Optional[TaskRequest]:
        """Head task of a workload that is not Done yet, if any."""
        queue = self._queues.get(workload)
        return queue[0] if queue else None

    def has_assigned(self, workload: str) -> bool:
        return self.current(workload) is not None

    def interrupt(self, workload: str) -> Optional[TaskRequest]:
        task = self.current(workload)
        if task is not None and task.status is TaskStatus.ACTIVE:
            task.transition(TaskStatus.INTERRUPTED)
            self._notify(task)
        return task

    def reattach(self, workload: str) -> Optional[TaskRequest]:
        """Hand the interrupted (or still pending) head task to the recovered workload."""
        task = self.current(workload)
        if task is not None and task.status in (TaskStatus.INTERRUPTED, TaskStatus.PENDING):
            self._try_start(task)
        return task

    def complete(self, task_id: str) -> None:
        task = self.get(task_id)
        task.transition(TaskStatus.DONE)
        self._notify(task)
        queue = self._queues[task.workload]
        if queue and queue[0] is task:
            queue.popleft()
        if queue:
            self._try_start(queue[0])

    @property
    def tasks(self) -> dict:
        return dict(self._tasks)

    def _try_start(self, task: TaskRequest) -> None:
        if self._dispatch(task):
            task.transition(TaskStatus.ACTIVE)
            self._notify(task)

    def _notify(self, task: TaskRequest) -> None:
        if self._listener is not None:
            self._listener(task)
