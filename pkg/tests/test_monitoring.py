import numpy as np
import pytest

from behavior import TickContext, TickStatus, tick
from monitoring import (
    MONITOR_PREDICATES,
    FailureClass,
    FailureEvent,
    FrequencyMonitorSpec,
    MarkerSensor,
    SupervisionSpec,
    TopicLog,
    conditional_monitor,
    estimate_observed_velocity,
    frequency_condition,
    monitor_conditions,
    supervision_condition,
    task_assigned,
    watched_topic,
)
from workloads import PlantState
from workloads.instance import Message


class Proxy:
    def __init__(self, assigned):
        self.assigned = assigned

    def has_assigned(self, workload):
        return self.assigned


def publish(log, topic, times, **payload):
    for t in times:
        log.add(Message(topic, "nav-0", "nav", int(t), tuple(payload.items())))


def ctx(t, log, proxy=None):
    return TickContext(t, {"topics": log, "proxy": proxy or Proxy(True)}, MONITOR_PREDICATES)


def cmd_vel_rate(min_rate=2, window=500):
    return frequency_condition(FrequencyMonitorSpec("cmd_vel", min_rate, window))


# ============================================================
# FREQUENCY
# ============================================================

def test_healthy_ten_hertz_stream():
    log = TopicLog()
    publish(log, "cmd_vel", range(0, 5000, 100))
    node = cmd_vel_rate(min_rate=10)
    assert log.count_in_window("cmd_vel", 4000, 4500) == 6
    assert tick(node, ctx(4500, log)) is TickStatus.SUCCESS


def test_silence_is_detected_one_window_after_the_last_message():
    log = TopicLog()
    publish(log, "cmd_vel", range(0, 20000, 100))
    node = cmd_vel_rate()
    verdicts = {t: tick(node, ctx(t, log)) for t in range(19000, 21000, 100)}
    first_failure = min(t for t, v in verdicts.items() if v is TickStatus.FAILURE)
    assert 20500 <= first_failure <= 20600
    assert all(v is TickStatus.SUCCESS for t, v in verdicts.items() if t < first_failure)


def test_slightly_slow_stream_fails_within_one_window():
    log = TopicLog()
    publish(log, "cmd_vel", [round(k * 1000 / 9) for k in range(40)])
    node = cmd_vel_rate(min_rate=10)
    verdicts = [tick(node, ctx(t, log)) for t in range(1000, 1600, 100)]
    assert TickStatus.FAILURE in verdicts


def test_no_verdict_before_a_full_window():
    node = cmd_vel_rate()
    assert tick(node, ctx(400, TopicLog())) is TickStatus.SUCCESS


def test_failing_conditions_are_reported_on_the_blackboard():
    c = ctx(1000, TopicLog())
    tick(cmd_vel_rate(), c)
    assert [n.name for n in c.blackboard["failing"]] == ["cmd_vel_rate"]


def test_required_count():
    assert FrequencyMonitorSpec("x", 2, 500).required_count == 1
    assert FrequencyMonitorSpec("x", 10, 500).required_count == 5
    with pytest.raises(ValueError):
        FrequencyMonitorSpec("x", 0, 500)


def test_trim_forgets_messages_before_the_cutoff():
    log = TopicLog()
    publish(log, "cmd_vel", range(0, 5000, 100))
    log.trim(4500)
    assert log.count_in_window("cmd_vel", 0, 5000) == 5
    assert log.count_in_window("cmd_vel", 4500, 4900) == 5
    assert log.last("cmd_vel").t == 4900


def test_trim_keeps_the_newest_messages_of_a_silent_topic():
    log = TopicLog()
    publish(log, "cmd_vel", range(0, 1000, 100))
    log.trim(20_000, keep=3)
    assert [m.t for m in log.recent("cmd_vel", 5, 20_000)] == [700, 800, 900]
    log.trim(20_000)
    assert log.last("cmd_vel").t == 900


def test_trimming_behind_the_window_keeps_verdicts():
    log, kept = TopicLog(), TopicLog()
    node = cmd_vel_rate()
    times = {t for t in range(0, 30_000, 100) if not 20_000 <= t < 21_000}
    for t in range(0, 30_000, 100):
        for target in (log, kept):
            publish(target, "cmd_vel", [t] if t in times else [])
        log.trim(t - 500)
        assert tick(node, ctx(t, log)) is tick(node, ctx(t, kept)), t
    assert log.count_in_window("cmd_vel", 0, 30_000) <= 6


# ============================================================
# CONDITIONAL COMPOSITION
# ============================================================

def guarded():
    return conditional_monitor(task_assigned("nav", name="nav_busy"), cmd_vel_rate(), name="cmd_vel_alive")


def test_silent_topic_without_task_is_healthy():
    assert tick(guarded(), ctx(1000, TopicLog(), Proxy(False))) is TickStatus.SUCCESS


def test_guard_on_and_healthy():
    log = TopicLog()
    publish(log, "cmd_vel", range(0, 1000, 100))
    assert tick(guarded(), ctx(1000, log, Proxy(True))) is TickStatus.SUCCESS


def test_guard_on_and_silent():
    assert tick(guarded(), ctx(1000, TopicLog(), Proxy(True))) is TickStatus.FAILURE


def test_monitor_conditions_skip_guards():
    tree = guarded()
    assert [n.name for n in monitor_conditions(tree)] == ["cmd_vel_rate"]
    assert watched_topic(monitor_conditions(tree)[0]) == "cmd_vel"


# ============================================================
# SUPERVISION
# ============================================================

def test_straight_line_speed_is_exact():
    poses = [(t, 0.5 * t / 1000, 0.0) for t in range(0, 500, 100)]
    assert estimate_observed_velocity(poses) == pytest.approx(0.5, abs=1e-9)


def test_single_pose_abstains():
    assert estimate_observed_velocity([(0, 1.0, 1.0)]) is None


def test_short_span_abstains():
    assert estimate_observed_velocity([(0, 0.0, 0.0), (100, 0.1, 0.0)]) is None


@pytest.mark.slow
def test_stationary_noise_stays_below_tolerance():
    sensor = MarkerSensor(np.random.default_rng(1), sigma=0.01)
    plant = PlantState()
    trials = 2000
    below = 0
    for _ in range(trials):
        poses = [(t, *sensor.read(plant)) for t in range(0, 500, 100)]
        below += estimate_observed_velocity(poses) < 0.1
    assert below >= 0.999 * trials


def supervise(commanded, observed_speed, until=3000):
    """Feed command and marker streams in arrival order, ticking every 100 ms."""
    log = TopicLog()
    node = supervision_condition(SupervisionSpec("cmd_vel", "marker_pose"), name="base_motion")
    c = ctx(0, log)
    verdicts = {}
    for t in range(0, until, 100):
        publish(log, "cmd_vel", [t], v=commanded, omega=0.0)
        log.add(Message("marker_pose", "marker", "marker", t,
                        (("x", observed_speed * t / 1000), ("y", 0.0))))
        c.sim_time = t
        verdicts[t] = tick(node, c)
    return verdicts


def test_intentionally_stopped_robot_is_healthy():
    assert set(supervise(0.0, 0.0).values()) == {TickStatus.SUCCESS}


def test_moving_robot_matching_command_is_healthy():
    assert set(supervise(0.5, 0.5).values()) == {TickStatus.SUCCESS}


def test_commanded_but_not_moving_fails_after_sustain():
    verdicts = supervise(0.5, 0.0)
    first = min(t for t, v in verdicts.items() if v is TickStatus.FAILURE)
    # first fit needs 200 ms of poses, then the discrepancy must last 500 ms
    assert first == 700


# ============================================================
# EVENTS
# ============================================================

def test_failure_event_detection_time():
    event = FailureEvent("nav", FailureClass.TOPIC_SILENCE, 20000, 20500)
    assert event.t_detection == 500


def test_detection_before_failure_is_invalid():
    with pytest.raises(ValueError):
        FailureEvent("nav", FailureClass.TOPIC_SILENCE, 20000, 19000)
