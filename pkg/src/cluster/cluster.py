"""
Simulated cluster
=================

Pods grouped into deployments, with Kubernetes-like phases
(Pending -> Starting -> Running -> Deleted). A new pod becomes Running
exactly pod_restart_latency after it was created; a deployment-managed pod
that gets deleted is replaced by a new Pending pod at the same instant.

A deployment is also the CPU accounting unit ("container"): successive pods
of one deployment form one sample series.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from cluster.events import EventQueue, EventTrace, Priority
from errors import ScenarioFault

logger = logging.getLogger(__name__)

# ============================================================
# DEFAULTS
# ============================================================
POD_RESTART_LATENCY_MS = 2900
POLICY_PATCH_LATENCY_MS = 100
CPU_SAMPLE_PERIOD_MS = 1000
MONITOR_CPU_MCPU = 150
MITIGATION_CPU_MCPU = 180


@dataclass(frozen=True)
class ClusterParams:
    pod_restart_latency: int = POD_RESTART_LATENCY_MS
    policy_patch_latency: int = POLICY_PATCH_LATENCY_MS
    cpu_sample_period: int = CPU_SAMPLE_PERIOD_MS
    latency_jitter: float = 0.0      # uniform +- fraction on cluster latencies
    cpu_noise: float = 0.0           # uniform +- fraction on CPU samples
    monitor_cpu: int = MONITOR_CPU_MCPU
    mitigation_cpu: int = MITIGATION_CPU_MCPU

    def problems(self) -> list:
        issues = []
        for name in ("pod_restart_latency", "policy_patch_latency", "cpu_sample_period"):
            if getattr(self, name) <= 0:
                issues.append(f"{name} must be > 0 ms")
        for name in ("latency_jitter", "cpu_noise"):
            if not 0.0 <= getattr(self, name) < 1.0:
                issues.append(f"{name} must be in [0, 1)")
        for name in ("monitor_cpu", "mitigation_cpu"):
            if getattr(self, name) < 0:
                issues.append(f"{name} must be >= 0 mCPU")
        return issues


class PodPhase(Enum):
    PENDING = "Pending"
    STARTING = "Starting"
    RUNNING = "Running"
    DELETED = "Deleted"


NEXT_PHASE = {
    PodPhase.PENDING: PodPhase.STARTING,
    PodPhase.STARTING: PodPhase.RUNNING,
}


@dataclass
class PodRecord:
    id: str
    deployment: str
    phase: PodPhase
    managed_by_deployment: bool
    created_at: int
    running_at: Optional[int] = None
    deleted_at: Optional[int] = None

    @property
    def alive(self) -> bool:
        return self.phase is not PodPhase.DELETED


@dataclass(frozen=True)
class CpuSample:
    container: str
    t: int
    usage: float      # milliCPU

    def __post_init__(self):
        if self.usage < 0:
            raise ValueError(f"negative CPU usage for {self.container} at {self.t} ms")


@dataclass
class Deployment:
    name: str
    managed: bool
    next_index: int = 0


PodCallback = Callable[[PodRecord], None]


class Cluster:
    """
    Pods, deployments and the CPU sampler.

    Args:
        queue: shared event queue
        trace: shared event trace
        params: cluster parameters
        rng: the run's numpy Generator (jitter and CPU noise)
        on_running / on_deleted: hooks called after a pod changes phase
        cpu_source: pod -> current milliCPU, or None when the pod's
            application does not run (not sampled)
    """

    def __init__(self, queue: EventQueue, trace: EventTrace, params: ClusterParams, rng,
                 on_running: Optional[PodCallback] = None,
                 on_deleted: Optional[PodCallback] = None,
                 cpu_source: Optional[Callable[[PodRecord], Optional[float]]] = None):
        self.queue = queue
        self.trace = trace
        self.params = params
        self.rng = rng
        self.on_running = on_running
        self.on_deleted = on_deleted
        self.cpu_source = cpu_source
        self.pods = {}
        self.deployments = {}
        self.cpu_samples = {}

    # ---------- deployments and pods ----------

    def add_deployment(self, name: str, managed: bool = False) -> Deployment:
        if name in self.deployments:
            raise ScenarioFault(f"deployment '{name}' already exists")
        dep = Deployment(name, managed)
        self.deployments[name] = dep
        return dep

    def _new_pod(self, deployment: str, phase: PodPhase) -> PodRecord:
        dep = self.deployments[deployment]
        pod = PodRecord(
            id=f"{deployment}-{dep.next_index}",
            deployment=deployment,
            phase=phase,
            managed_by_deployment=dep.managed,
            created_at=self.queue.now,
        )
        dep.next_index += 1
        self.pods[pod.id] = pod
        return pod

    def start_pod(self, deployment: str) -> PodRecord:
        """Create a pod that is already Running (initial cluster state)."""
        pod = self._new_pod(deployment, PodPhase.RUNNING)
        pod.running_at = self.queue.now
        self.trace.record(self.queue.now, "pod", id=pod.id, phase=pod.phase.value)
        if self.on_running:
            self.on_running(pod)
        return pod

    def deploy(self, deployment: str) -> PodRecord:
        """Create a Pending pod; it is Running pod_restart_latency later."""
        if deployment not in self.deployments:
            raise ScenarioFault(f"unknown deployment '{deployment}'")
        pod = self._new_pod(deployment, PodPhase.PENDING)
        self.trace.record(self.queue.now, "pod", id=pod.id, phase=pod.phase.value)
        latency = self.latency(self.params.pod_restart_latency)
        now = self.queue.now
        self.queue.schedule(now + latency // 2, Priority.CLUSTER, self._advance, pod.id)
        self.queue.schedule(now + latency, Priority.CLUSTER, self._advance, pod.id)
        return pod

    def _advance(self, pod_id: str) -> None:
        pod = self.pods[pod_id]
        if pod.phase not in NEXT_PHASE:
            return
        pod.phase = NEXT_PHASE[pod.phase]
        self.trace.record(self.queue.now, "pod", id=pod.id, phase=pod.phase.value)
        if pod.phase is PodPhase.RUNNING:
            pod.running_at = self.queue.now
            if self.on_running:
                self.on_running(pod)

    def delete_pod(self, pod_id: str) -> Optional[PodRecord]:
        """
        Delete a pod. A managed pod gets a replacement created immediately.

        Returns:
            The replacement pod, if one was created.
        """
        pod = self.pods.get(pod_id)
        if pod is None:
            raise ScenarioFault(f"unknown pod '{pod_id}'")
        now = self.queue.now
        if pod.phase is PodPhase.DELETED:
            self.trace.record(now, "warning", message=f"pod {pod_id} already deleted")
            return None

        pod.phase = PodPhase.DELETED
        pod.deleted_at = now
        self.trace.record(now, "pod", id=pod.id, phase=pod.phase.value)
        if self.on_deleted:
            self.on_deleted(pod)

        if pod.managed_by_deployment:
            return self.deploy(pod.deployment)
        return None

    def live_pod(self, deployment: str) -> Optional[PodRecord]:
        """Newest pod of a deployment that is not deleted."""
        alive = [p for p in self.pods.values() if p.deployment == deployment and p.alive]
        return alive[-1] if alive else None

    def latency(self, base: int) -> int:
        jitter = self.params.latency_jitter
        if jitter <= 0:
            return base
        return max(1, int(round(base * (1.0 + self.rng.uniform(-jitter, jitter)))))

    # ---------- CPU ----------

    def sample_cpu(self) -> list:
        """One sample per live container at the current time."""
        now = self.queue.now
        samples = []
        for pod in sorted(self.pods.values(), key=lambda p: p.deployment):
            if pod.phase is not PodPhase.RUNNING or self.cpu_source is None:
                continue
            usage = self.cpu_source(pod)
            if usage is None:
                continue
            if self.params.cpu_noise > 0:
                usage = usage * (1.0 + self.rng.uniform(-self.params.cpu_noise, self.params.cpu_noise))
            sample = CpuSample(pod.deployment, now, float(usage))
            self.cpu_samples.setdefault(pod.deployment, []).append(sample)
            samples.append(sample)
        return samples
