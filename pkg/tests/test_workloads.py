import math

import pytest

from errors import ScenarioFault, UnknownTaskError
from workloads import (
    CheckpointStore,
    LifecycleMode,
    PlantState,
    TaskKind,
    TaskProxy,
    TaskRequest,
    TaskStatus,
    WorkloadInstance,
    WorkloadKind,
    control_step,
    default_profile,
    restore,
    run_task,
    step_plant,
)
from workloads.plant import WATCHDOG_MS


def active(kind=WorkloadKind.NAVIGATION, **overrides):
    profile = default_profile(kind)
    if overrides:
        profile = profile.with_overrides(**overrides)
    return WorkloadInstance("w-0", "w", profile, mode=LifecycleMode.ACTIVE, initialized=True)


def nav_task(*goals, task_id="t1"):
    return TaskRequest(task_id, "w", TaskKind.NAVIGATE_TO_GOALS, goals)


# ============================================================
# PROFILES
# ============================================================

def test_navigation_uninitialized_cpu_is_six_tenths_of_active():
    profile = default_profile(WorkloadKind.NAVIGATION)
    assert profile.cpu(LifecycleMode.POD_STARTED) / profile.cpu(LifecycleMode.ACTIVE) == 0.6


def test_shadow_costs_as_much_as_active():
    for kind in WorkloadKind:
        profile = default_profile(kind)
        assert profile.cpu(LifecycleMode.SHADOW_EXECUTION) == profile.cpu(LifecycleMode.ACTIVE)


def test_down_instance_costs_nothing():
    assert default_profile(WorkloadKind.NAVIGATION).cpu(LifecycleMode.DOWN) == 0


def test_default_timings():
    nav = default_profile(WorkloadKind.NAVIGATION)
    manip = default_profile(WorkloadKind.MANIPULATION)
    assert (nav.startup_time, nav.init_time) == (2000, 1500)
    assert (manip.startup_time, manip.init_time) == (1500, 1000)
    assert nav.primary_topic == "cmd_vel"
    assert nav.control_period == 100
    assert manip.period_of("joint_states") == 50


def test_mode_aliases():
    assert LifecycleMode.parse("uninitialized") is LifecycleMode.POD_STARTED
    assert LifecycleMode.parse("Initialized") is LifecycleMode.APP_INITIALIZED
    assert LifecycleMode.parse("shadow") is LifecycleMode.SHADOW_EXECUTION


# ============================================================
# PLANT
# ============================================================

def test_zero_command_leaves_pose_unchanged():
    state = PlantState(x=1.0, y=2.0, theta=0.5)
    assert step_plant(state, 250).pose == state.pose


def test_straight_line_closed_form():
    state = PlantState(v=1.0)
    for _ in range(100):
        state = step_plant(state, 10)
    assert state.x == pytest.approx(1.0)
    assert state.y == pytest.approx(0.0)


def test_arc_integration_is_step_size_independent():
    coarse = fine = PlantState(v=1.0, omega=1.0)
    for _ in range(10):
        coarse = step_plant(coarse, 100)
    for _ in range(1000):
        fine = step_plant(fine, 1)
    assert math.hypot(coarse.x - fine.x, coarse.y - fine.y) < 0.02
    assert coarse.theta == pytest.approx(1.0)


def test_delivered_command_decays_after_watchdog():
    state = PlantState().with_base_command(0.5, 0.0)
    for _ in range(WATCHDOG_MS // 10):
        state = step_plant(state, 10)
    assert state.v == 0.0
    assert state.x == pytest.approx(0.5 * WATCHDOG_MS / 1000)
    moved = state.x
    state = step_plant(state, 500)
    assert state.x == moved


def test_joint_command_moves_joints():
    state = PlantState().with_joint_command((1.0, -1.0))
    state = step_plant(state, 100)
    assert state.joint_pos == pytest.approx((0.1, -0.1))


def test_step_rejects_non_positive_dt():
    with pytest.raises(ValueError):
        step_plant(PlantState(), 0)


# ============================================================
# CONTROLLERS
# ============================================================

def test_goal_at_current_pose_is_done_in_one_cycle():
    task = nav_task((0.0, 0.0))
    messages = list(run_task(active(), task))
    assert task.status is TaskStatus.DONE
    assert {m.t for m in messages} == {0}


def test_goal_one_meter_ahead():
    task = nav_task((1.0, 0.0))
    messages = list(run_task(active(max_speed=1.0), task))
    assert task.status is TaskStatus.DONE
    done_at = messages[-1].t
    assert 1000 <= done_at <= 1300


def test_manipulation_half_radian_move():
    task = TaskRequest("m1", "w", TaskKind.MOVE_ARM_TO_TARGETS, [(0.5, 0.0)])
    messages = list(run_task(active(WorkloadKind.MANIPULATION), task))
    assert task.status is TaskStatus.DONE
    assert messages[-1].t == pytest.approx(500, abs=50)
    assert messages[-1].data["position"][0] == pytest.approx(0.5, abs=0.01)


def test_navigation_visits_every_goal_in_order():
    goals = [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    inst = active()
    task = nav_task(*goals)
    poses = [m.data for m in run_task(inst, task) if m.topic == "pose"]
    assert task.status is TaskStatus.DONE
    last = poses[-1]
    assert math.hypot(last["x"] - 0.0, last["y"] - 1.0) <= 0.05


def test_control_step_requires_running_instance():
    inst = active()
    inst.mode = LifecycleMode.APP_INITIALIZED
    with pytest.raises(ScenarioFault):
        control_step(inst, PlantState(), 0)


def test_shadow_instance_computes_commands():
    inst = active()
    inst.mode = LifecycleMode.SHADOW_EXECUTION
    inst.attach(nav_task((1.0, 0.0)))
    messages, done = control_step(inst, PlantState(), 0)
    assert [m.topic for m in messages] == ["cmd_vel", "pose"]
    assert not done
    assert inst.muted


# ============================================================
# TASK PROXY
# ============================================================

class Workers:
    def __init__(self):
        self.up = True
        self.seen = []

    def dispatch(self, task):
        self.seen.append(task.id)
        return self.up


def test_proxy_keeps_task_across_failure():
    workers = Workers()
    proxy = TaskProxy(workers.dispatch)
    proxy.submit(nav_task((1, 0)))
    assert proxy.status("t1") is TaskStatus.ACTIVE
    workers.up = False
    proxy.interrupt("w")
    assert proxy.status("t1") is TaskStatus.INTERRUPTED
    workers.up = True
    proxy.reattach("w")
    assert proxy.status("t1") is TaskStatus.ACTIVE


def test_proxy_queues_fifo():
    workers = Workers()
    proxy = TaskProxy(workers.dispatch)
    proxy.submit(nav_task((1, 0), task_id="a"))
    assert proxy.submit(nav_task((2, 0), task_id="b")) is TaskStatus.PENDING
    proxy.complete("a")
    assert proxy.status("a") is TaskStatus.DONE
    assert proxy.status("b") is TaskStatus.ACTIVE
    assert proxy.current("w").id == "b"


def test_done_is_final():
    proxy = TaskProxy(Workers().dispatch)
    proxy.submit(nav_task((1, 0)))
    proxy.complete("t1")
    assert proxy.interrupt("w") is None
    with pytest.raises(ScenarioFault):
        proxy.get("t1").transition(TaskStatus.ACTIVE)
    assert proxy.status("t1") is TaskStatus.DONE


def test_unknown_task_id():
    proxy = TaskProxy(Workers().dispatch)
    with pytest.raises(UnknownTaskError):
        proxy.status("nope")
    with pytest.raises(KeyError):
        proxy.get("nope")


def test_listener_sees_every_transition():
    seen = []
    proxy = TaskProxy(Workers().dispatch, lambda task: seen.append(task.status))
    proxy.submit(nav_task((1, 0)))
    proxy.interrupt("w")
    proxy.reattach("w")
    proxy.complete("t1")
    assert seen == [TaskStatus.ACTIVE, TaskStatus.INTERRUPTED, TaskStatus.ACTIVE, TaskStatus.DONE]


def test_empty_goal_list_rejected():
    with pytest.raises(ValueError):
        nav_task()


# ============================================================
# CHECKPOINTS
# ============================================================

def test_checkpoint_records_goal_index():
    store = CheckpointStore()
    inst = active()
    task = nav_task((1, 0), (2, 0), (3, 0))
    task.status = TaskStatus.ACTIVE
    inst.attach(task)
    inst.goal_index = 1
    cp = store.checkpoint_tick(inst, PlantState(x=1.0), 1200)
    assert cp.goal_index == 1
    assert cp.snapshot == (1.0, 0.0, 0.0)
    assert store.latest("w") is cp


def test_only_latest_checkpoint_is_kept():
    store = CheckpointStore()
    inst = active()
    task = nav_task((1, 0))
    task.status = TaskStatus.ACTIVE
    inst.attach(task)
    store.checkpoint_tick(inst, PlantState(), 100)
    second = store.checkpoint_tick(inst, PlantState(), 200)
    assert len(store) == 1
    assert store.latest("w") is second


def test_no_checkpoint_while_interrupted():
    store = CheckpointStore()
    inst = active()
    task = nav_task((1, 0))
    task.status = TaskStatus.INTERRUPTED
    inst.attach(task)
    assert store.checkpoint_tick(inst, PlantState(), 100) is None
    assert "w" not in store


def test_restore_resumes_at_checkpoint_goal():
    store = CheckpointStore()
    goals = [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    origin = active()
    task = nav_task(*goals)
    task.status = TaskStatus.ACTIVE
    origin.attach(task)
    origin.goal_index = 1
    cp = store.checkpoint_tick(origin, PlantState(x=1.0), 2000)

    fallback = active()
    fallback.attach(task)
    restore(fallback, cp)
    assert fallback.goal_index == 1

    messages = list(run_task(fallback, task, plant=PlantState(x=1.0)))
    assert task.status is TaskStatus.DONE
    first = messages[0].data
    # heads for goal 2 (north), never back to goal 1
    assert first["v"] == 0.0 and first["omega"] > 0


def test_restore_rejects_foreign_task_checkpoint():
    store = CheckpointStore()
    origin = active()
    task = nav_task((1, 0))
    task.status = TaskStatus.ACTIVE
    origin.attach(task)
    cp = store.checkpoint_tick(origin, PlantState(), 100)
    other = active()
    other.attach(nav_task((2, 0), task_id="t2"))
    with pytest.raises(ScenarioFault):
        restore(other, cp)


def test_restore_needs_initialized_instance():
    inst = active()
    inst.initialized = False
    with pytest.raises(ScenarioFault):
        restore(inst, CheckpointStore().fresh("w", None, 0))
