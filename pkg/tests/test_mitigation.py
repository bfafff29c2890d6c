import pytest

from behavior import action, sequence
from cluster.simulation import RunStatus, Simulation, run
from mitigation import (
    COMPONENTS,
    STRATEGY_ORDER,
    RecoveryStrategy,
    apply_strategy,
    default_tree,
    mitigation_targets,
    strategies_for,
)
from monitoring import FailureClass
from scenario import MitigationKey
from workloads import LifecycleMode, TaskStatus, WorkloadKind

# t_detection, t_cluster, t_startup, t_reinitialization, t_recovery
EXPECTED = {
    "nav_scratch": (500, 2900, 2000, 1500, 6900),
    "nav_pod_started": (500, 100, 2000, 1500, 4100),
    "nav_initialized": (500, 100, 2000, 300, 2900),
    "nav_shadow": (500, 100, 0, 100, 700),
    "manip_scratch": (500, 2900, 1500, 1000, 5900),
    "nav_dependency": (500, 2900, 2000, 1800, 7200),
}

STRATEGY_TOTALS = {
    ("nav_scratch", RecoveryStrategy.RESTART_SCRATCH): 6900,
    ("nav_scratch", RecoveryStrategy.FALLBACK_POD_STARTED): 4100,
    ("nav_scratch", RecoveryStrategy.FALLBACK_INITIALIZED): 2900,
    ("nav_scratch", RecoveryStrategy.FALLBACK_SHADOW_EXECUTION): 700,
    ("manip_scratch", RecoveryStrategy.RESTART_SCRATCH): 5900,
    ("manip_scratch", RecoveryStrategy.FALLBACK_POD_STARTED): 3100,
    ("manip_scratch", RecoveryStrategy.FALLBACK_SHADOW_EXECUTION): 650,
}


def only_report(result):
    assert result.status is RunStatus.COMPLETED, result.faults
    assert len(result.reports) == 1
    return result.reports[0]


# ============================================================
# RECOVERY TIMINGS
# ============================================================

@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_recovery_components(load, name):
    report = only_report(run(load(name), seed=1))
    detection, cluster, startup, reinit, total = EXPECTED[name]
    assert report.failure.t_failure_actual == 20_000
    assert report.t_detection == detection
    assert report.t_cluster == cluster
    assert report.t_startup == startup
    assert report.t_reinitialization == reinit
    assert report.t_recovery == total
    assert report.identity_holds()


@pytest.mark.parametrize("name, strategy", sorted(STRATEGY_TOTALS, key=lambda k: (k[0], k[1].value)))
def test_strategy_override(load, name, strategy):
    report = only_report(run(load(name), seed=1, strategy=strategy))
    assert report.strategy is strategy
    assert report.t_recovery == STRATEGY_TOTALS[(name, strategy)]
    assert sum(report.components) == report.t_recovery


def test_faster_levels_recover_faster(load):
    spec = load("nav_scratch")
    totals = [only_report(run(spec, 1, s)).t_recovery for s in STRATEGY_ORDER]
    assert totals == sorted(totals, reverse=True)
    assert len(set(totals)) == len(totals)


def test_shadow_fallback_has_nothing_to_start(load):
    report = only_report(run(load("nav_shadow"), seed=1))
    assert report.t_startup == 0
    assert report.strategy is RecoveryStrategy.FALLBACK_SHADOW_EXECUTION


def test_initialized_fallback_only_hands_over_state(load):
    started = only_report(run(load("nav_pod_started"), seed=1))
    initialized = only_report(run(load("nav_initialized"), seed=1))
    assert started.t_cluster == initialized.t_cluster
    assert initialized.t_reinitialization < started.t_reinitialization


def test_report_record_keys(load):
    record = only_report(run(load("nav_scratch"), seed=1)).to_record()
    assert list(record) == [
        "workload", "failure_class", "t_failure_actual", "t_detected", "strategy",
        "t_detection", "t_cluster", "t_startup", "t_reinit", "t_recovery", "steps",
    ]
    assert record["steps"] == ["restart_scratch nav", "handover nav", "promote nav"]
    assert COMPONENTS[-1] == "t_reinitialization"


# ============================================================
# BEHAVIOR DISCREPANCY
# ============================================================

def test_silent_remap_is_caught_by_supervision(load):
    report = only_report(run(load("nav_remap"), seed=1))
    assert report.failure.failure_class is FailureClass.BEHAVIOR_DISCREPANCY
    assert report.failure.t_failure_actual == 15_000
    assert 500 <= report.t_detection <= 1000
    assert report.strategy is RecoveryStrategy.FALLBACK_POD_STARTED


def test_remapped_robot_stops_within_the_watchdog(load):
    sim = Simulation(load("nav_remap"), seed=1)
    sim._setup()
    sim.queue.run_until(15_300)
    assert sim.plant.speed == 0.0
    assert sim.plant.omega == 0.0


# ============================================================
# DEPENDENCIES
# ============================================================

def test_dependency_is_recovered_before_the_dependent(load):
    result = run(load("nav_dependency"), seed=1)
    report = only_report(result)
    steps = list(report.steps)
    assert report.failure.workload == "nav"
    assert report.strategy is RecoveryStrategy.RESTART_SCRATCH
    assert steps[0] == "recover_dependency nav"
    assert steps.index("restart_scratch loc") < steps.index("handover loc") < steps.index("handover nav")
    assert steps[-1] == "handover nav"
    assert [r.payload["workload"] for r in result.trace.of_kind("failure_absorbed")] == ["loc"]


def test_dependent_stalls_while_dependency_is_down(load):
    result = run(load("nav_dependency"), seed=1)
    stalls = result.trace.of_kind("stall")
    assert stalls and stalls[0].t >= 20_000


# ============================================================
# STATE RESTORATION
# ============================================================

@pytest.mark.parametrize("name", ["nav_scratch", "nav_pod_started", "nav_initialized", "nav_shadow"])
def test_task_survives_the_failure(load, name):
    result = run(load(name), seed=1)
    assert result.tasks["patrol"] is TaskStatus.DONE
    assert "Interrupted" in [r.payload["status"] for r in result.trace.of_kind("task")]


def test_restore_uses_a_checkpoint_from_before_the_detection(load):
    result = run(load("nav_pod_started"), seed=1)
    restore = result.trace.of_kind("restore")[0]
    detected = result.detections[0].t_detected
    assert restore.payload["task"] == "patrol"
    assert restore.payload["checkpoint_t"] < detected
    assert restore.payload["goal_index"] >= 0


# ============================================================
# CONTROLLER EDGE CASES
# ============================================================

def test_promoting_an_active_instance_only_warns(load):
    spec = load("nav_scratch")
    spec.mitigation[MitigationKey(FailureClass.TOPIC_SILENCE, "nav")] = sequence(
        "recover_nav",
        action("restart_nav", "restart_scratch", workload="nav"),
        action("handover_nav", "handover", workload="nav"),
        action("promote_nav", "promote", workload="nav"),
        action("promote_again", "promote", workload="nav"),
    )
    result = run(spec, seed=1)
    assert len(result.reports) == 1
    warnings = [r.payload["message"] for r in result.trace.of_kind("warning")]
    assert any("already active" in w for w in warnings)


def test_missing_fallback_escalates(load):
    spec = load("nav_scratch")
    spec.mitigation[MitigationKey(FailureClass.TOPIC_SILENCE, "nav")] = default_tree(
        RecoveryStrategy.FALLBACK_POD_STARTED, "nav")
    result = run(spec, seed=1)
    assert result.status is RunStatus.ESCALATED
    assert result.reports == []
    assert "escalation" in result.flags
    assert result.trace.of_kind("escalation")[0].payload["workload"] == "nav"


def test_healthy_run_starts_no_mitigation(load):
    result = run(load("manip_healthy"), seed=1)
    assert result.reports == []
    assert result.trace.of_kind("detection") == []


# ============================================================
# STRATEGIES
# ============================================================

def test_initialized_level_does_not_apply_to_manipulation(load):
    assert RecoveryStrategy.FALLBACK_INITIALIZED not in strategies_for(WorkloadKind.MANIPULATION)
    with pytest.raises(ValueError):
        apply_strategy(load("manip_scratch"), RecoveryStrategy.FALLBACK_INITIALIZED)


def test_apply_strategy_copies_the_scenario(load):
    spec = load("nav_scratch")
    shadow = apply_strategy(spec, RecoveryStrategy.FALLBACK_SHADOW_EXECUTION)
    assert shadow.workload("nav").fallback is LifecycleMode.SHADOW_EXECUTION
    assert spec.workload("nav").fallback is LifecycleMode.SCRATCH
    tree = shadow.mitigation_tree(FailureClass.BEHAVIOR_DISCREPANCY, "nav")
    assert [c.ref for c in tree.children] == ["recover_dependency", "connect_fallback", "handover", "promote"]


def test_mitigation_targets_resolve_topics(load):
    assert mitigation_targets(load("nav_remap")) == ["nav"]
    assert mitigation_targets(load("nav_dependency")) == ["loc"]
    assert mitigation_targets(load("nav_healthy")) == []


def test_strategy_aliases():
    assert RecoveryStrategy.parse("shadow") is RecoveryStrategy.FALLBACK_SHADOW_EXECUTION
    assert RecoveryStrategy.parse("uninitialized") is RecoveryStrategy.FALLBACK_POD_STARTED
    with pytest.raises(ValueError):
        RecoveryStrategy.parse("reboot")


# ============================================================
# SEED SWEEPS
# ============================================================

SEEDS = range(1, 51)


@pytest.mark.slow
def test_deletion_is_detected_within_a_tick_of_the_window(load):
    spec = load("nav_scratch")
    detections = {seed: only_report(run(spec, seed=seed)).t_detection for seed in SEEDS}
    assert all(500 <= d <= 600 for d in detections.values()), detections


@pytest.mark.slow
def test_silent_remap_is_detected_within_1200ms(load):
    spec = load("nav_remap")
    detections = {}
    for seed in SEEDS:
        report = only_report(run(spec, seed=seed))
        assert report.failure.failure_class is FailureClass.BEHAVIOR_DISCREPANCY, seed
        detections[seed] = report.t_detection
    assert max(detections.values()) <= 1200, detections


@pytest.mark.slow
@pytest.mark.parametrize("name", ["nav_healthy", "manip_healthy"])
def test_healthy_scenarios_never_alarm(load, name):
    spec = load(name)
    for seed in SEEDS:
        result = run(spec, seed=seed)
        assert result.status is RunStatus.COMPLETED, (seed, result.faults)
        assert result.detections == [], seed
        assert "false_positive" not in result.flags, seed
        assert not result.trace.of_kind("false_positive"), seed
