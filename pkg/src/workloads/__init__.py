"""Simulated robotic workloads: profiles, plant, tasks, instances and checkpoints."""

from workloads.checkpoint import Checkpoint, CheckpointStore, restore
from workloads.instance import Message, WorkloadInstance, control_step, run_task
from workloads.plant import PlantState, step_plant
from workloads.profiles import (
    DEFAULT_PROFILES,
    LifecycleMode,
    WorkloadKind,
    WorkloadProfile,
    default_profile,
)
from workloads.tasks import TaskKind, TaskProxy, TaskRequest, TaskStatus

__all__ = [
    "Checkpoint", "CheckpointStore", "restore",
    "Message", "WorkloadInstance", "control_step", "run_task",
    "PlantState", "step_plant",
    "DEFAULT_PROFILES", "LifecycleMode", "WorkloadKind", "WorkloadProfile", "default_profile",
    "TaskKind", "TaskProxy", "TaskRequest", "TaskStatus",
]
