"""
Scenario runner
===============

Wires one scenario into the event loop and executes it to its duration:

    plant step        every 10 ms
    control cycles    every control period of each Active (or shadow) instance
    marker sensor     at the sensor rate of each supervision monitor
    monitor tick      every 100 ms; checkpoints of healthy workloads
    mitigation        on detection, on progress and with every monitor tick
    CPU sampler       every cpu_sample_period

All randomness (sensor noise, latency jitter, CPU noise) is drawn from one
numpy Generator seeded with the run seed, in event order, so equal
(scenario, seed) pairs give identical traces and metrics.
"""

import copy
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from analysis.metrics import MetricsBundle
from behavior import NodeKind, TickContext, TickStatus, tick, walk
from cluster.cluster import Cluster, PodPhase
from cluster.events import EventQueue, EventTrace, Priority
from cluster.network import MONITOR_CONSUMER, Network
from errors import ConfigurationError, MitigationFault, ScenarioFault
from mitigation.controller import MitigationController
from mitigation.strategies import RecoveryStrategy, apply_strategy
from monitoring.composition import FAILURE_CLASS_OF, MONITOR_PREDICATES, watched_topic
from monitoring.events import MONITOR_PERIOD_MS
from monitoring.frequency import DEFAULT_WINDOW_MS, TopicLog
from monitoring.supervision import FIT_SAMPLES, MarkerSensor, spec_of as supervision_spec
from scenario.model import InjectionKind, ScenarioSpec
from workloads.checkpoint import CheckpointStore
from workloads.instance import Message, WorkloadInstance, apply_command, control_step
from workloads.plant import PLANT_STEP_MS, PlantState, step_plant
from workloads.profiles import MANIP_JOINTS, LifecycleMode, WorkloadKind
from workloads.tasks import TaskProxy

logger = logging.getLogger(__name__)

MONITOR_DEPLOYMENT = "monitor"
FALLBACK_SUFFIX = "-fallback"

# consumer -> workload kind whose primary output it executes
ACTUATORS = {
    "base": WorkloadKind.NAVIGATION,
    "arm": WorkloadKind.MANIPULATION,
}


class RunStatus(Enum):
    COMPLETED = "completed"
    SCENARIO_FAULT = "scenario_fault"
    ESCALATED = "escalated"


@dataclass
class RunResult:
    run_id: str
    scenario: str
    seed: int
    strategy: Optional[RecoveryStrategy]
    status: RunStatus
    trace: EventTrace
    metrics: MetricsBundle
    tasks: dict = field(default_factory=dict)         # task id -> TaskStatus
    faults: list = field(default_factory=list)
    detections: list = field(default_factory=list)    # FailureEvents
    flags: list = field(default_factory=list)

    @property
    def reports(self) -> list:
        return self.metrics.reports


def run_id_for(spec: ScenarioSpec, seed: int, strategy: Optional[RecoveryStrategy] = None) -> str:
    return f"{spec.name}-{strategy.value}-{seed}" if strategy else f"{spec.name}-{seed}"


def topic_retention(spec: ScenarioSpec) -> int:
    """Longest trailing window any frequency monitor counts over."""
    if spec.monitors is None:
        return DEFAULT_WINDOW_MS
    return max((n.arg("window") for n in walk(spec.monitors) if n.ref == "frequency"), default=DEFAULT_WINDOW_MS)


class Simulation:
    def __init__(self, spec: ScenarioSpec, seed: int, run_id: Optional[str] = None):
        self.spec = spec
        self.seed = seed
        self.run_id = run_id or run_id_for(spec, seed)
        self.rng = np.random.default_rng(seed)
        self.queue = EventQueue()
        self.trace = EventTrace()
        params = spec.cluster_params

        self.cluster = Cluster(self.queue, self.trace, params, self.rng,
                               on_running=self._on_pod_running,
                               on_deleted=self._on_pod_deleted,
                               cpu_source=self._cpu_of)
        self.network = Network(self.queue, self.trace,
                               patch_latency=lambda: self.cluster.latency(params.policy_patch_latency))
        self.proxy = TaskProxy(self._dispatch, self._on_task_change)
        self.checkpoints = CheckpointStore()
        self.topics = TopicLog()
        self._retention = topic_retention(spec)
        self.controller = MitigationController(self)

        self.plant = PlantState()
        self.instances = {}            # instance id -> WorkloadInstance
        self._by_pod = {}
        self.injection_log = []        # (t, workload)
        self.flags = []
        self.detections = []
        self._booting = False
        self._verdicts = {}
        self._blackboard = {"topics": self.topics, "proxy": self.proxy}
        self._faults = []

    # ============================================================
    # SETUP
    # ============================================================

    def _setup(self) -> None:
        spec = self.spec
        manip = [d for d in spec.workloads if d.profile.kind is WorkloadKind.MANIPULATION]
        if manip:
            joints = len(next((t.goals[0] for t in spec.tasks
                               if t.workload in {d.name for d in manip}), (0.0,) * MANIP_JOINTS))
            self.plant = PlantState(joint_pos=tuple(0.0 for _ in range(joints)))

        self._booting = True
        if spec.monitors is not None:
            self.cluster.add_deployment(MONITOR_DEPLOYMENT)
            self.cluster.start_pod(MONITOR_DEPLOYMENT)
        for decl in spec.workloads:
            self.cluster.add_deployment(decl.name, managed=decl.managed)
            if decl.fallback is not LifecycleMode.SCRATCH:
                self.cluster.add_deployment(decl.name + FALLBACK_SUFFIX)
        for decl in spec.workloads:
            self.cluster.start_pod(decl.name)
            if decl.fallback is not LifecycleMode.SCRATCH:
                self.cluster.start_pod(decl.name + FALLBACK_SUFFIX)
        self._booting = False

        for consumer, kind in ACTUATORS.items():
            topics = {d.profile.primary_topic for d in spec.workloads if d.profile.kind is kind}
            if topics:
                self.network.subscribe(consumer, self._actuate, topics)
            for decl in spec.workloads:
                if decl.profile.kind is kind:
                    self.network.connect(consumer, decl.name, decl.name)
        self.network.subscribe(MONITOR_CONSUMER, self._observe)
        for decl in spec.workloads:
            self.network.connect(MONITOR_CONSUMER, decl.name, decl.name)

        for task in spec.tasks:
            self.queue.schedule(task.submit_at, Priority.INJECT, self._submit, task.fresh_copy())
        for injection in spec.injections:
            self.queue.schedule(injection.at, Priority.INJECT, self._inject, injection)

        self.queue.schedule(PLANT_STEP_MS, Priority.PLANT, self._step_plant)
        if spec.monitors is not None:
            self.queue.schedule(0, Priority.MONITOR, self._monitor_tick)
            self._setup_sensors()
        self.queue.schedule(0, Priority.SAMPLE, self._sample_cpu)

        for inst in list(self.instances.values()):
            if inst.is_active or inst.muted:
                self.start_cycle(inst, 0)

    def _setup_sensors(self) -> None:
        seen = set()
        for node in walk(self.spec.monitors):
            if node.kind is not NodeKind.CONDITION or node.ref != "supervision":
                continue
            sup = supervision_spec(node)
            if sup.observed_pose_topic in seen:
                continue
            seen.add(sup.observed_pose_topic)
            sensor = MarkerSensor(self.rng, sup.sensor_noise_sigma, sup.observed_pose_topic)
            self.queue.schedule(0, Priority.SENSOR, self._sense, sensor, sup.sensor_period)

    # ============================================================
    # PODS AND INSTANCES
    # ============================================================

    def _on_pod_running(self, pod) -> None:
        if pod.deployment == MONITOR_DEPLOYMENT:
            return
        fallback = pod.deployment.endswith(FALLBACK_SUFFIX)
        workload = pod.deployment[:-len(FALLBACK_SUFFIX)] if fallback else pod.deployment
        decl = self.spec.workload(workload)

        inst = WorkloadInstance(id=pod.id, workload=workload, profile=decl.profile,
                                role="fallback" if fallback else "main", pod_id=pod.id)
        self.instances[inst.id] = inst
        self._by_pod[pod.id] = inst
        self.network.register_instance(inst.id, workload, pod.deployment)

        if self._booting:
            if fallback:
                inst.mode = decl.fallback
                inst.initialized = decl.fallback is not LifecycleMode.POD_STARTED
            else:
                inst.mode = LifecycleMode.ACTIVE
                inst.initialized = True
                inst.started_at = 0
            self.trace.record(self.queue.now, "app", instance=inst.id, mode=inst.mode.value)
            return

        inst.mode = LifecycleMode.POD_STARTED
        if not fallback and self.current_instance(workload, exclude=inst.id) is None:
            self.launch(inst)
        else:
            # a replacement while someone else serves the workload joins the pool
            inst.role = "fallback"
            self.trace.record(self.queue.now, "app", instance=inst.id, mode=inst.mode.value)
        self.kick()

    def _on_pod_deleted(self, pod) -> None:
        inst = self._by_pod.get(pod.id)
        if inst is None or not inst.is_live:
            return
        was_active = inst.is_active
        inst.mode = LifecycleMode.DOWN
        inst.epoch += 1
        self.trace.record(self.queue.now, "app", instance=inst.id, mode=inst.mode.value)
        if was_active and inst.role == "main":
            inst.task = None
            self.proxy.interrupt(inst.workload)

    def instance_on(self, pod_id: str) -> Optional[WorkloadInstance]:
        return self._by_pod.get(pod_id)

    def deployment_of(self, inst: WorkloadInstance) -> str:
        return self.cluster.pods[inst.pod_id].deployment

    def current_instance(self, workload: str, exclude: Optional[str] = None) -> Optional[WorkloadInstance]:
        """Newest live main instance of a workload."""
        for inst in reversed(list(self.instances.values())):
            if inst.workload == workload and inst.role == "main" and inst.is_live and inst.id != exclude:
                return inst
        return None

    def is_serving(self, workload: str) -> bool:
        inst = self.current_instance(workload)
        return inst is not None and inst.is_active and not inst.stalled

    def fallback_level(self, workload: str) -> LifecycleMode:
        decl = self.spec.workload(workload)
        if decl.fallback_from:
            return self.spec.workload(decl.fallback_from).fallback
        return decl.fallback

    def take_fallback(self, workload: str) -> WorkloadInstance:
        """
        Hand a pooled fallback instance over to `workload`.

        Raises:
            MitigationFault: the pool holds no live fallback for the workload.
        """
        decl = self.spec.workload(workload)
        owner = decl.fallback_from or workload
        for inst in self.instances.values():
            if inst.role == "fallback" and inst.workload == owner and inst.is_live:
                inst.role = "main"
                inst.workload = workload
                inst.profile = decl.profile
                self.network.register_instance(inst.id, workload, self.deployment_of(inst))
                self.trace.record(self.queue.now, "fallback_taken", instance=inst.id, workload=workload)
                return inst
        raise MitigationFault(f"no fallback instance available for '{workload}'")

    def stop_main(self, workload: str) -> None:
        """Delete the main deployment's live pod, if any."""
        pod = self.cluster.live_pod(workload)
        if pod is not None and pod.phase is PodPhase.RUNNING:
            self.cluster.delete_pod(pod.id)

    def launch(self, inst: WorkloadInstance) -> None:
        """Start the application in a running pod; Started after startup_time."""
        inst.mode = LifecycleMode.STARTING
        inst.started_at = None
        self.trace.record(self.queue.now, "app", instance=inst.id, mode=inst.mode.value)
        self.queue.schedule(self.queue.now + inst.profile.startup_time, Priority.CLUSTER,
                            self._started, inst, inst.epoch)

    def _started(self, inst: WorkloadInstance, epoch: int) -> None:
        if inst.epoch != epoch or inst.mode is not LifecycleMode.STARTING:
            return
        inst.mode = LifecycleMode.STARTED
        inst.started_at = self.queue.now
        self.trace.record(self.queue.now, "app", instance=inst.id, mode=inst.mode.value)
        self.kick()

    def kick(self, t: Optional[int] = None) -> None:
        if self.controller.busy:
            self.controller.kick(self.queue.now if t is None else t)

    # ============================================================
    # CONTROL CYCLES
    # ============================================================

    def start_cycle(self, inst: WorkloadInstance, t: int) -> None:
        inst.epoch += 1
        inst.cycle_origin = t
        self.queue.schedule(t, Priority.WORKLOAD, self._cycle, inst, inst.epoch)

    def resume(self, inst: WorkloadInstance) -> None:
        """Continue a stalled (or paused) Active instance from now."""
        inst.stalled = False
        self.trace.record(self.queue.now, "resume", instance=inst.id)
        self.proxy.reattach(inst.workload)
        self.start_cycle(inst, self.queue.now)

    def _cycle(self, inst: WorkloadInstance, epoch: int) -> None:
        if inst.epoch != epoch or not (inst.is_active or inst.muted):
            return
        now = self.queue.now

        if inst.is_active and not all(self.is_serving(d) for d in inst.profile.dependencies):
            inst.stalled = True
            inst.task = None
            self.trace.record(now, "stall", instance=inst.id)
            self.proxy.interrupt(inst.workload)
            return

        messages, completed = control_step(inst, self.plant, now)
        for message in messages:
            reached = self.network.publish(message, muted=inst.muted)
            if reached:
                self.controller.on_output(message)
        if completed and inst.task is not None:
            task, inst.task = inst.task, None
            self.proxy.complete(task.id)

        self.queue.schedule(now + inst.profile.control_period, Priority.WORKLOAD, self._cycle, inst, epoch)

    def _actuate(self, message: Message) -> None:
        self.plant = apply_command(self.plant, message)

    def _observe(self, message: Message) -> None:
        self.topics.add(message)

    def _step_plant(self) -> None:
        self.plant = step_plant(self.plant, PLANT_STEP_MS)
        self.queue.schedule(self.queue.now + PLANT_STEP_MS, Priority.PLANT, self._step_plant)

    def _sense(self, sensor: MarkerSensor, period: int) -> None:
        now = self.queue.now
        x, y = sensor.read(self.plant)
        self.topics.add(Message(sensor.topic, "marker", "marker", now, (("x", x), ("y", y))))
        self.queue.schedule(now + period, Priority.SENSOR, self._sense, sensor, period)

    # ============================================================
    # TASKS
    # ============================================================

    def _dispatch(self, task) -> bool:
        inst = self.current_instance(task.workload)
        if inst is None or not inst.is_active or inst.stalled or not inst.initialized:
            return False
        inst.attach(task)
        return True

    def _on_task_change(self, task) -> None:
        self.trace.record(self.queue.now, "task", id=task.id, workload=task.workload, status=task.status.value)

    def _submit(self, task) -> None:
        self.proxy.submit(task)

    # ============================================================
    # INJECTIONS
    # ============================================================

    def _inject(self, injection) -> None:
        now = self.queue.now
        if injection.kind is InjectionKind.DELETE_POD:
            workload = injection.target
        else:
            workload = self.spec.publisher_of(injection.target)
        self.trace.record(now, "injection", kind=injection.kind.value, target=injection.target)
        self.injection_log.append((now, workload))
        if workload in self.controller.in_flight:
            self.trace.record(now, "overlap", workload=workload)
            self.flag("overlap")
            logger.warning("t=%d injection on '%s' while it is being mitigated", now, workload)

        if injection.kind is InjectionKind.DELETE_POD:
            pod = self.cluster.live_pod(workload)
            if pod is None:
                self.trace.record(now, "warning", message=f"no live pod of '{workload}' to delete")
                return
            self.cluster.delete_pod(pod.id)
        else:
            inst = self.current_instance(workload)
            if inst is None:
                self.trace.record(now, "warning", message=f"no instance publishes '{injection.target}'")
                return
            self.network.silent_remap(inst.id, injection.target)

    # ============================================================
    # MONITORING
    # ============================================================

    def _monitor_tick(self) -> None:
        now = self.queue.now
        self.topics.trim(now - self._retention, keep=FIT_SAMPLES)
        bb = self._blackboard
        bb["failing"] = []
        tick(self.spec.monitors, TickContext(now, bb, MONITOR_PREDICATES))

        failing = {}
        names = set()
        for node in bb["failing"]:
            names.add(node.name)
            workload = self.spec.publisher_of(watched_topic(node))
            if workload is not None and workload not in failing:
                failing[workload] = (FAILURE_CLASS_OF[node.ref], node.name)

        for name in sorted(names | set(self._verdicts)):
            verdict = TickStatus.FAILURE if name in names else TickStatus.SUCCESS
            if self._verdicts.get(name, TickStatus.SUCCESS) is not verdict:
                self.trace.record(now, "monitor", condition=name, verdict=verdict.value)
            self._verdicts[name] = verdict

        for decl in self.spec.workloads:
            if decl.name in failing or decl.name in self.controller.in_flight:
                continue
            inst = self.current_instance(decl.name)
            if inst is not None:
                self.checkpoints.checkpoint_tick(inst, self.plant, now)

        self.detections.extend(self.controller.on_detections(failing, now))
        self.kick()
        self.queue.schedule(now + MONITOR_PERIOD_MS, Priority.MONITOR, self._monitor_tick)

    # ============================================================
    # CPU
    # ============================================================

    def _cpu_of(self, pod) -> Optional[float]:
        params = self.spec.cluster_params
        if pod.deployment == MONITOR_DEPLOYMENT:
            return float(params.mitigation_cpu if self.controller.busy else params.monitor_cpu)
        inst = self._by_pod.get(pod.id)
        if inst is None or not inst.is_live:
            return None
        return float(inst.profile.cpu(inst.mode))

    def _sample_cpu(self) -> None:
        self.cluster.sample_cpu()
        period = self.spec.cluster_params.cpu_sample_period
        self.queue.schedule(self.queue.now + period, Priority.SAMPLE, self._sample_cpu)

    # ============================================================
    # RUN
    # ============================================================

    def flag(self, name: str) -> None:
        if name not in self.flags:
            self.flags.append(name)

    def execute(self) -> RunResult:
        status = RunStatus.COMPLETED
        try:
            self._setup()
            self.queue.run_until(self.spec.duration)
        except (ConfigurationError, ScenarioFault) as e:
            now = self.queue.now
            self._faults.append(str(e))
            self.trace.record(now, "fault", message=str(e))
            logger.error("run %s aborted at %d ms: %s", self.run_id, now, e)
            status = RunStatus.SCENARIO_FAULT

        if status is RunStatus.COMPLETED:
            for m in self.controller.unfinished():
                self.trace.record(self.queue.now, "unfinished", workload=m.workload, steps=list(m.steps))
                self.flag("unfinished_mitigation")
                logger.warning("run %s: mitigation of '%s' did not finish", self.run_id, m.workload)
            if self.controller.escalated:
                status = RunStatus.ESCALATED

        bundle = MetricsBundle(self.run_id, list(self.controller.reports),
                               {c: list(s) for c, s in sorted(self.cluster.cpu_samples.items())})
        return RunResult(
            run_id=self.run_id,
            scenario=self.spec.name,
            seed=self.seed,
            strategy=None,
            status=status,
            trace=self.trace,
            metrics=bundle,
            tasks={tid: t.status for tid, t in self.proxy.tasks.items()},
            faults=list(self._faults),
            detections=list(self.detections),
            flags=list(self.flags),
        )


def run(spec: ScenarioSpec, seed: int, strategy: Optional[RecoveryStrategy] = None) -> RunResult:
    """
    Execute a scenario once.

    Args:
        spec: parsed scenario (left untouched)
        seed: seed of the run's random generator
        strategy: when given, every injected workload is mitigated with it

    Raises:
        ValueError: strategy does not apply to an injected workload's kind.
    """
    spec = apply_strategy(spec, strategy) if strategy else copy.deepcopy(spec)
    sim = Simulation(spec, seed, run_id_for(spec, seed, strategy))
    logger.info("run %s: %s, seed %d, %d ms", sim.run_id, spec.name, seed, spec.duration)
    result = sim.execute()
    result.strategy = strategy
    logger.info("run %s finished: %s, %d report(s)", sim.run_id, result.status.value, len(result.reports))
    return result
