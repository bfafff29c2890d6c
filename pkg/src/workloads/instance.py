"""
Workload instances and their controllers
========================================

A WorkloadInstance is one running copy (one pod) of a logical workload, either
the main instance or a fallback held at some lifecycle level. Once Active it
runs a control cycle every control period and publishes its topics.

Controllers are plain functions from plant state to commands:

    navigation    - turn toward the current goal, drive once roughly aligned,
                    land exactly on the goal (speed capped by distance / period)
    manipulation  - move every joint toward the target at the rate limit
    localization  - publishes the (noise-free) robot pose
"""

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from errors import ScenarioFault
from workloads.plant import PLANT_STEP_MS, PlantState, step_plant
from workloads.profiles import LifecycleMode, WorkloadKind, WorkloadProfile
from workloads.tasks import TaskRequest, TaskStatus

GOAL_TOLERANCE_M = 0.05
JOINT_TOLERANCE_RAD = 0.01
HEADING_GATE_RAD = math.pi / 4


@dataclass(frozen=True)
class Message:
    topic: str
    source: str        # instance id
    workload: str      # logical workload (service)
    t: int
    payload: tuple = ()

    @property
    def data(self) -> dict:
        return dict(self.payload)


@dataclass
class WorkloadInstance:
    id: str
    workload: str
    profile: WorkloadProfile
    role: str = "main"                       # "main" | "fallback"
    pod_id: Optional[str] = None
    mode: LifecycleMode = LifecycleMode.DOWN
    initialized: bool = False
    task: Optional[TaskRequest] = None
    goal_index: int = 0
    stalled: bool = False
    cycle_origin: Optional[int] = None
    epoch: int = 0                           # bumped to cancel scheduled control cycles
    started_at: Optional[int] = None
    restored_from: object = field(default=None, repr=False)

    @property
    def is_active(self) -> bool:
        return self.mode is LifecycleMode.ACTIVE

    @property
    def is_live(self) -> bool:
        return self.mode not in (LifecycleMode.DOWN, LifecycleMode.SCRATCH)

    @property
    def muted(self) -> bool:
        """Shadow instances consume inputs but never deliver outputs."""
        return self.mode is LifecycleMode.SHADOW_EXECUTION

    def attach(self, task: TaskRequest) -> None:
        if task.status is TaskStatus.PENDING:
            self.goal_index = 0
        self.task = task


# ============================================================
# CONTROLLERS
# ============================================================

def wrap_angle(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def navigation_command(pose, goals, goal_index, max_speed, max_turn_rate, period_ms):
    """
    One navigation control decision.

    Returns:
        (v, omega, goal_index, done); goals already within tolerance are skipped.
    """
    x, y, theta = pose
    while goal_index < len(goals) and math.hypot(goals[goal_index][0] - x,
                                                 goals[goal_index][1] - y) <= GOAL_TOLERANCE_M:
        goal_index += 1
    if goal_index >= len(goals):
        return 0.0, 0.0, goal_index, True

    gx, gy = goals[goal_index][0], goals[goal_index][1]
    dt = period_ms / 1000.0
    dist = math.hypot(gx - x, gy - y)
    error = wrap_angle(math.atan2(gy - y, gx - x) - theta)

    v = min(max_speed, dist / dt) * math.cos(error) if abs(error) < HEADING_GATE_RAD else 0.0
    omega = max(-max_turn_rate, min(max_turn_rate, error / dt))
    return v, omega, goal_index, False


def manipulation_command(joint_pos, targets, goal_index, limit, period_ms):
    """
    One arm control decision: rate-limited motion toward the current target.

    Returns:
        (cmd, goal_index, done)
    """
    def reached(target):
        return all(abs(t - p) <= JOINT_TOLERANCE_RAD for t, p in zip(target, joint_pos))

    while goal_index < len(targets) and reached(targets[goal_index]):
        goal_index += 1
    if goal_index >= len(targets):
        return tuple(0.0 for _ in joint_pos), goal_index, True

    dt = period_ms / 1000.0
    cmd = tuple(max(-limit, min(limit, (t - p) / dt)) for t, p in zip(targets[goal_index], joint_pos))
    return cmd, goal_index, False


# ============================================================
# CONTROL CYCLE
# ============================================================

def control_step(instance: WorkloadInstance, plant: PlantState, t: int):
    """
    Run one control cycle of an Active (or shadow) instance.

    Returns:
        (messages, completed) where completed is True when this cycle
        finished the instance's task.
    """
    if instance.mode not in (LifecycleMode.ACTIVE, LifecycleMode.SHADOW_EXECUTION):
        raise ScenarioFault(f"instance '{instance.id}' is {instance.mode.value}, cannot run its task")

    profile = instance.profile
    topics = profile.topics
    task = instance.task
    messages = []
    completed = False

    def emit(topic, **payload):
        messages.append(Message(topic, instance.id, instance.workload, t, tuple(payload.items())))

    if profile.kind is WorkloadKind.NAVIGATION:
        if task is not None:
            v, omega, instance.goal_index, completed = navigation_command(
                plant.pose, task.goals, instance.goal_index,
                profile.max_speed, profile.max_turn_rate, profile.control_period)
            emit(topics[0], v=v, omega=omega)
        if len(topics) > 1:
            emit(topics[1], x=plant.x, y=plant.y, theta=plant.theta)

    elif profile.kind is WorkloadKind.MANIPULATION:
        if task is not None:
            cmd, instance.goal_index, completed = manipulation_command(
                plant.joint_pos, task.goals, instance.goal_index,
                profile.joint_speed_limit, profile.control_period)
        else:
            cmd = tuple(0.0 for _ in plant.joint_pos)
        emit(topics[0], position=tuple(plant.joint_pos), cmd=cmd)

    else:
        emit(topics[0], x=plant.x, y=plant.y, theta=plant.theta)

    return messages, completed


def apply_command(plant: PlantState, message: Message) -> PlantState:
    """Apply a delivered command message to the plant."""
    data = message.data
    if "v" in data:
        return plant.with_base_command(data["v"], data["omega"])
    if "cmd" in data:
        return plant.with_joint_command(data["cmd"])
    return plant


def run_task(instance: WorkloadInstance, task: TaskRequest, plant: Optional[PlantState] = None,
             horizon_ms: int = 600_000) -> Iterator[Message]:
    """
    Execute a task on a standalone instance driving its own plant.

    Yields every published message; the generator ends when the task is Done
    (status set on the task) or the horizon is reached.
    """
    if instance.mode is not LifecycleMode.ACTIVE or not instance.initialized:
        raise ScenarioFault(f"instance '{instance.id}' must be Active and initialized to run a task")

    if plant is None:
        joints = len(task.goals[0]) if instance.profile.kind is WorkloadKind.MANIPULATION else 0
        plant = PlantState(joint_pos=tuple(0.0 for _ in range(joints)))
    if task.status is TaskStatus.PENDING:
        task.transition(TaskStatus.ACTIVE)
    instance.attach(task)

    period = instance.profile.control_period
    t = 0
    while t <= horizon_ms:
        messages, completed = control_step(instance, plant, t)
        for message in messages:
            plant = apply_command(plant, message)
            yield message
        if completed:
            task.transition(TaskStatus.DONE)
            instance.task = None
            return
        for _ in range(period // PLANT_STEP_MS):
            plant = step_plant(plant, PLANT_STEP_MS)
        t += period
