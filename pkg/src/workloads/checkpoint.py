"""
Checkpoints
===========

The last healthy application state of a workload: which task it was executing,
how far it got (goal index) and a snapshot of the plant it was driving.
Checkpoints are kept outside the monitored workload, in the mitigation side of
the system, so they survive the workload's pod.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from errors import ScenarioFault
from workloads.profiles import LifecycleMode, WorkloadKind
from workloads.tasks import TaskStatus

logger = logging.getLogger(__name__)

CHECKPOINT_PERIOD_MS = 100


@dataclass(frozen=True)
class Checkpoint:
    workload: str
    t: int
    task_id: Optional[str]
    goal_index: int
    snapshot: tuple = ()         # (x, y, theta) or joint positions


class CheckpointStore:
    """Latest-only checkpoint retention, one slot per logical workload."""

    def __init__(self):
        self._latest = {}

    def checkpoint_tick(self, instance, plant, t: int) -> Optional[Checkpoint]:
        """
        Store the state of a healthy, working instance.

        Nothing is stored unless the instance is Active, not stalled and its
        task is Active (an interrupted task has no healthy state to keep).
        """
        task = instance.task
        if instance.mode is not LifecycleMode.ACTIVE or instance.stalled:
            return None
        if task is None or task.status is not TaskStatus.ACTIVE:
            return None

        if instance.profile.kind is WorkloadKind.MANIPULATION:
            snapshot = tuple(plant.joint_pos)
        else:
            snapshot = plant.pose
        cp = Checkpoint(instance.workload, t, task.id, instance.goal_index, snapshot)
        self._latest[instance.workload] = cp
        return cp

    def latest(self, workload: str) -> Optional[Checkpoint]:
        return self._latest.get(workload)

    def fresh(self, workload: str, task_id: Optional[str], t: int) -> Checkpoint:
        return Checkpoint(workload, t, task_id, 0)

    def __contains__(self, workload: str) -> bool:
        return workload in self._latest

    def __len__(self):
        return len(self._latest)


def restore(instance, cp: Checkpoint, task=None) -> None:
    """
    Resume a recovering instance from a checkpoint.

    Args:
        instance: the instance taking over; must be initialized
        cp: checkpoint of the failed workload
        task: the task the instance will continue (defaults to instance.task)

    Raises:
        ScenarioFault: instance not initialized, or cp belongs to another task.
    """
    if not instance.initialized:
        raise ScenarioFault(f"restore into uninitialized instance '{instance.id}'")

    task = task if task is not None else instance.task
    if task is not None and cp.task_id is not None and cp.task_id != task.id:
        raise ScenarioFault(
            f"checkpoint of task '{cp.task_id}' handed to '{instance.id}' running task '{task.id}'")

    instance.goal_index = cp.goal_index
    instance.restored_from = cp
    logger.debug("restored %s at goal %d (checkpoint t=%d)", instance.id, cp.goal_index, cp.t)
