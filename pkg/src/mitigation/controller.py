"""
Mitigation controller
=====================

Turns monitor detections into mitigations and drives them to completion:

  * at most one mitigation in flight per logical workload; detections for a
    workload under mitigation are ignored
  * when a workload and one of its dependents fail in the same tick, the
    dependency's failure is absorbed into the dependent's mitigation (its
    recover_dependency step brings the dependency back first)
  * a mitigation tree that returns Failure, or a step that raises
    MitigationFault, escalates; escalated workloads are left in their failed
    state and never mitigated again
  * the RecoveryReport is measured when the tree has returned Success and the
    restored instance delivered its first output

Trees are ticked right after the detection, whenever the simulation signals
progress (pod Running, application started, policy applied, handover done)
and on every monitor tick.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Optional

from behavior import BTNode, TickContext, TickStatus, tick
from cluster.events import Priority
from errors import MitigationFault
from mitigation.report import RecoveryReport
from mitigation.steps import STEP_ACTIONS
from mitigation.strategies import RecoveryStrategy, default_tree
from monitoring.composition import task_assigned_predicate
from monitoring.events import FailureEvent

logger = logging.getLogger(__name__)

MITIGATION_PREDICATES = {"task_assigned": task_assigned_predicate}


@dataclass
class Mitigation:
    failure: FailureEvent
    tree: BTNode
    started_at: int
    strategy: Optional[RecoveryStrategy] = None
    absorbed: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    marks: dict = field(default_factory=dict)     # "cluster_ready" / "app_started" -> [t, ...]
    restored: set = field(default_factory=set)     # instance ids that took over
    tree_done: bool = False
    first_output: Optional[int] = None
    report: Optional[RecoveryReport] = None
    _state: dict = field(default_factory=dict, repr=False)

    @property
    def workload(self) -> str:
        return self.failure.workload

    @property
    def finished(self) -> bool:
        return self.report is not None

    def state(self, node: BTNode) -> dict:
        return self._state.setdefault(id(node), {})

    def mark(self, name: str, t: int) -> None:
        times = self.marks.setdefault(name, [])
        if t not in times:
            times.append(t)

    def start_step(self, node: BTNode, t: int, strategy: Optional[RecoveryStrategy] = None) -> None:
        self.steps.append(f"{node.ref} {node.arg('workload')}")
        if strategy is not None and self.strategy is None:
            self.strategy = strategy

    def measure(self) -> RecoveryReport:
        t_detected = self.failure.t_detected
        cluster_ready = min(self.marks.get("cluster_ready", [t_detected]))
        app_started = max(self.marks.get("app_started", [cluster_ready]))
        return RecoveryReport.measure(
            self.failure,
            self.strategy or RecoveryStrategy.RESTART_SCRATCH,
            cluster_ready=cluster_ready,
            app_started=app_started,
            first_output=self.first_output,
            steps=self.steps,
        )


class MitigationController:
    """
    Args:
        sim: the running Simulation (steps reach the cluster, network, task
            proxy and checkpoint store through it)
    """

    def __init__(self, sim):
        self.sim = sim
        self.in_flight = {}          # workload -> Mitigation (absorbed dependencies included)
        self.escalated = set()
        self.reports = []
        self.mitigations = []
        self._recovered_at = {}      # workload -> t of the last completed recovery
        self._consumed = set()       # injection indices already attributed to a failure
        self._kicks = set()

    # ---------- detections ----------

    def on_detections(self, failing: dict, now: int) -> list:
        """
        Start mitigations for newly failing workloads.

        Args:
            failing: workload -> (FailureClass, condition name), in tree order
            now: detection time

        Returns:
            The FailureEvents that started a mitigation.
        """
        spec = self.sim.spec
        fresh = [w for w in failing if w not in self.in_flight and w not in self.escalated]

        closure = {w: set(spec.dependency_closure(w)) for w in fresh}
        top = [w for w in fresh if not any(w in closure[o] for o in fresh if o != w)]

        started = []
        for w in top:
            failure_class, condition_name = failing[w]
            failure = FailureEvent(w, failure_class, self._failure_time(w, now), now, condition_name)
            m = self.mitigate(failure)
            started.append(failure)
            for dep in fresh:
                if dep in closure[w] and dep not in self.in_flight:
                    self.absorb(dep, m, now)
        return started

    def _failure_time(self, workload: str, now: int) -> int:
        """
        Injection time behind a detection: the latest unattributed injection on
        the workload or one of its dependencies, after its last recovery.
        """
        spec = self.sim.spec
        related = {workload, *spec.dependency_closure(workload)}
        since = self._recovered_at.get(workload, -1)
        candidates = [
            (t, i) for i, (t, target) in enumerate(self.sim.injection_log)
            if target in related and since < t <= now and i not in self._consumed
        ]
        if not candidates:
            self.sim.trace.record(now, "false_positive", workload=workload)
            self.sim.flag("false_positive")
            logger.warning("detection on '%s' at %d ms matches no injection", workload, now)
            return now
        for t, i in candidates:
            self._consumed.add(i)
        return max(candidates)[0]

    def mitigate(self, failure: FailureEvent, tree: Optional[BTNode] = None) -> Mitigation:
        """
        Start mitigating a detected failure. Runs asynchronously inside the
        event loop; the returned Mitigation carries the report once finished.
        """
        spec = self.sim.spec
        w = failure.workload
        if tree is None:
            tree = spec.mitigation_tree(failure.failure_class, w)
        if tree is None:
            tree = default_tree(RecoveryStrategy.for_level(self.sim.fallback_level(w)), w)
        m = Mitigation(failure, copy.deepcopy(tree), started_at=failure.t_detected)
        self.in_flight[w] = m
        self.mitigations.append(m)
        self.sim.trace.record(failure.t_detected, "detection", **failure.to_record())
        logger.info("t=%d mitigating %s on '%s' (t_detection=%d ms)",
                    failure.t_detected, failure.failure_class.value, w, failure.t_detection)
        self.kick(failure.t_detected)
        return m

    def absorb(self, workload: str, m: Mitigation, now: int) -> None:
        if self.in_flight.get(workload) is m:
            return
        self.in_flight[workload] = m
        m.absorbed.append(workload)
        self.sim.trace.record(now, "failure_absorbed", workload=workload, into=m.workload)

    # ---------- ticking ----------

    def kick(self, t: int) -> None:
        """Tick in-flight mitigations at t (once per timestamp)."""
        if t in self._kicks:
            return
        self._kicks.add(t)
        self.sim.queue.schedule(t, Priority.MITIGATION, self._tick_all, t)

    def _tick_all(self, t: int) -> None:
        self._kicks.discard(t)
        for m in self._unique_in_flight():
            if not m.tree_done:
                self._tick(m, t)

    def _unique_in_flight(self) -> list:
        seen, out = set(), []
        for m in self.in_flight.values():
            if id(m) not in seen:
                seen.add(id(m))
                out.append(m)
        return out

    def _tick(self, m: Mitigation, now: int) -> None:
        blackboard = {"sim": self.sim, "mitigation": m, "controller": self, "proxy": self.sim.proxy}
        ctx = TickContext(now, blackboard, MITIGATION_PREDICATES, STEP_ACTIONS)
        try:
            status = tick(m.tree, ctx)
        except MitigationFault as e:
            self._escalate(m, now, str(e))
            return
        if status is TickStatus.FAILURE:
            self._escalate(m, now, f"mitigation tree '{m.tree.name}' failed")
        elif status is TickStatus.SUCCESS:
            m.tree_done = True
            self.sim.trace.record(now, "mitigation_done", workload=m.workload, steps=list(m.steps))
            self._maybe_finish(m, now)

    def _escalate(self, m: Mitigation, now: int, reason: str) -> None:
        workloads = [m.workload, *m.absorbed]
        self.sim.trace.record(now, "escalation", workload=m.workload, reason=reason)
        logger.error("t=%d escalation on '%s': %s", now, m.workload, reason)
        for w in workloads:
            self.in_flight.pop(w, None)
            self.escalated.add(w)
        self.sim.flag("escalation")

    # ---------- outputs ----------

    def on_output(self, message) -> None:
        """A message reached at least one consumer."""
        m = self.in_flight.get(message.workload)
        if m is None or m.first_output is not None or message.workload != m.workload:
            return
        if message.source not in m.restored:
            return
        if message.topic != self.sim.spec.workload(m.workload).profile.primary_topic:
            return
        m.first_output = message.t
        self._maybe_finish(m, message.t)

    def _maybe_finish(self, m: Mitigation, now: int) -> None:
        if not m.tree_done or m.first_output is None or m.finished:
            return
        m.report = m.measure()
        self.reports.append(m.report)
        self.sim.trace.record(now, "recovery", **m.report.to_record())
        logger.info("t=%d '%s' recovered via %s in %d ms", now, m.workload,
                    m.report.strategy.value, m.report.t_recovery)
        for w in [m.workload, *m.absorbed]:
            self.in_flight.pop(w, None)
            self._recovered_at[w] = now

    @property
    def busy(self) -> bool:
        return bool(self.in_flight)

    def unfinished(self) -> list:
        return [m for m in self.mitigations if not m.finished and m.workload not in self.escalated]
