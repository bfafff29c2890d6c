"""
Mitigation step library
=======================

The actions a mitigation tree is built from. Trees are ticked reactively
(from the root, every tick), so every step keeps its own progress in the
mitigation's per-node state and answers Success once it has finished.

    restart_scratch     delete the serving pod, re-create it through the
                        deployment, wait for the application to start
    connect_fallback    take a fallback instance from the pool, rewire every
                        consumer of the service to it (network policy patch),
                        launch its application if it is not running yet
    handover            initialize (or hand state to) the new instance and
                        restore the last checkpoint
    promote             make the recovered instance Active
    recover_dependency  run each failed dependency's own mitigation tree first

Steps reach the simulation through the blackboard: "sim" is the running
Simulation, "mitigation" the Mitigation being executed.
"""

import copy
import logging

from behavior import BTNode, TickContext, TickStatus, tick
from cluster.cluster import PodPhase
from errors import MitigationFault
from mitigation.strategies import RecoveryStrategy, default_tree
from workloads.checkpoint import restore
from workloads.profiles import LifecycleMode

logger = logging.getLogger(__name__)

# modes a launched application passes through before it can take state
NOT_STARTED = (LifecycleMode.DOWN, LifecycleMode.POD_STARTED, LifecycleMode.STARTING)


def _env(node: BTNode, ctx: TickContext):
    m = ctx.blackboard["mitigation"]
    return ctx.blackboard["sim"], m, m.state(node), node.arg("workload")


def _serving(sim, workload: str):
    inst = sim.current_instance(workload)
    if inst is None:
        raise MitigationFault(f"no instance of '{workload}' to recover")
    return inst


def restart_scratch(node: BTNode, ctx: TickContext) -> TickStatus:
    sim, m, st, workload = _env(node, ctx)
    if st.get("done"):
        return TickStatus.SUCCESS

    if "pod" not in st:
        m.start_step(node, ctx.sim_time, RecoveryStrategy.RESTART_SCRATCH)
        cluster = sim.cluster
        live = cluster.live_pod(workload)
        pod = None
        if live is not None and live.phase is PodPhase.RUNNING:
            pod = cluster.delete_pod(live.id)
        elif live is not None:
            pod = live                      # managed replacement already on its way
        if pod is None:
            pod = cluster.deploy(workload)
        st["pod"] = pod.id
        logger.debug("restart_scratch %s: waiting for pod %s", workload, pod.id)

    pod = sim.cluster.pods[st["pod"]]
    if not pod.alive:
        raise MitigationFault(f"replacement pod {pod.id} of '{workload}' was deleted")
    if pod.phase is not PodPhase.RUNNING:
        return TickStatus.RUNNING
    m.mark("cluster_ready", pod.running_at)

    inst = sim.instance_on(pod.id)
    if inst is None or inst.started_at is None:
        return TickStatus.RUNNING
    m.mark("app_started", inst.started_at)
    st["done"] = True
    return TickStatus.SUCCESS


def connect_fallback(node: BTNode, ctx: TickContext) -> TickStatus:
    sim, m, st, workload = _env(node, ctx)
    if st.get("done"):
        return TickStatus.SUCCESS

    if "instance" not in st:
        inst = sim.take_fallback(workload)
        level = inst.mode
        m.start_step(node, ctx.sim_time, RecoveryStrategy.for_level(level))
        sim.stop_main(workload)

        provider = sim.deployment_of(inst)
        applied = []
        for policy in sim.network.policies_for(workload):
            at = sim.network.patch_policy(policy.consumer, workload, provider,
                                          on_applied=lambda _p: sim.kick())
            if at is not None:
                applied.append(at)
        st["instance"] = inst.id
        st["provider"] = provider
        st["ready_at"] = min(applied) if applied else ctx.sim_time
        st["launch"] = level in (LifecycleMode.POD_STARTED, LifecycleMode.APP_INITIALIZED)

    inst = sim.instances[st["instance"]]
    if not inst.is_live:
        raise MitigationFault(f"fallback instance {inst.id} of '{workload}' is gone")
    pending = [p for p in sim.network.policies_for(workload) if p.provider != st["provider"]]
    if pending:
        return TickStatus.RUNNING
    m.mark("cluster_ready", st["ready_at"])

    if st["launch"]:
        if not st.get("launched"):
            sim.launch(inst)
            st["launched"] = True
        if inst.started_at is None:
            return TickStatus.RUNNING
        m.mark("app_started", inst.started_at)

    st["done"] = True
    return TickStatus.SUCCESS


def handover(node: BTNode, ctx: TickContext) -> TickStatus:
    sim, m, st, workload = _env(node, ctx)
    if st.get("done"):
        return TickStatus.SUCCESS

    now = ctx.sim_time
    if "ends_at" not in st:
        inst = _serving(sim, workload)
        if inst.mode in NOT_STARTED or inst.mode is LifecycleMode.INITIALIZING:
            return TickStatus.RUNNING
        if inst.muted:
            duration = 0
        elif inst.initialized:
            duration = inst.profile.handover_time
        else:
            duration = inst.profile.init_time
        m.start_step(node, now)
        st["instance"] = inst.id
        st["resume_mode"] = inst.mode
        st["ends_at"] = now + duration
        if duration > 0:
            inst.mode = LifecycleMode.INITIALIZING
            sim.trace.record(now, "app", instance=inst.id, mode=inst.mode.value)
            sim.kick(st["ends_at"])
            return TickStatus.RUNNING

    if now < st["ends_at"]:
        return TickStatus.RUNNING

    inst = sim.instances[st["instance"]]
    if not inst.is_live:
        raise MitigationFault(f"instance {inst.id} of '{workload}' died during handover")
    if inst.mode is LifecycleMode.INITIALIZING:
        inst.mode = st["resume_mode"]
        sim.trace.record(now, "app", instance=inst.id, mode=inst.mode.value)
    inst.initialized = True

    task = sim.proxy.current(workload)
    if task is not None:
        cp = sim.checkpoints.latest(workload)
        if cp is None or cp.task_id != task.id:
            cp = sim.checkpoints.fresh(workload, task.id, now)
        restore(inst, cp, task)
        sim.trace.record(now, "restore", instance=inst.id, task=task.id,
                         goal_index=cp.goal_index, checkpoint_t=cp.t)
    m.restored.add(inst.id)

    if inst.is_active:
        sim.resume(inst)
    st["done"] = True
    return TickStatus.SUCCESS


def promote(node: BTNode, ctx: TickContext) -> TickStatus:
    sim, m, st, workload = _env(node, ctx)
    if st.get("done"):
        return TickStatus.SUCCESS

    now = ctx.sim_time
    inst = _serving(sim, workload)
    if inst.is_active:
        sim.trace.record(now, "warning", message=f"promote: {inst.id} is already active")
        st["done"] = True
        return TickStatus.SUCCESS
    if inst.mode in NOT_STARTED or inst.mode is LifecycleMode.INITIALIZING:
        return TickStatus.RUNNING
    if not inst.initialized:
        raise MitigationFault(f"promote: {inst.id} was never initialized")

    m.start_step(node, now)
    was_shadow = inst.muted
    inst.mode = LifecycleMode.ACTIVE
    sim.trace.record(now, "app", instance=inst.id, mode=inst.mode.value)
    sim.proxy.reattach(workload)
    if not was_shadow:
        sim.start_cycle(inst, now)
    st["done"] = True
    return TickStatus.SUCCESS


def recover_dependency(node: BTNode, ctx: TickContext) -> TickStatus:
    sim, m, st, workload = _env(node, ctx)
    if st.get("done"):
        return TickStatus.SUCCESS

    if not st.get("started"):
        m.start_step(node, ctx.sim_time)
        st["started"] = True
    trees = st.setdefault("trees", {})
    controller = ctx.blackboard["controller"]

    for dep in sim.spec.workload(workload).profile.dependencies:
        if dep not in trees:
            if sim.is_serving(dep):
                continue
            owner = controller.in_flight.get(dep)
            if owner is not None and owner is not m:
                return TickStatus.RUNNING
            controller.absorb(dep, m, ctx.sim_time)
            template = (sim.spec.mitigation_tree(m.failure.failure_class, dep)
                        or default_tree(RecoveryStrategy.for_level(sim.fallback_level(dep)), dep))
            trees[dep] = copy.deepcopy(template)

        status = tick(trees[dep], TickContext(ctx.sim_time, ctx.blackboard, ctx.predicates, ctx.actions))
        if status is not TickStatus.SUCCESS:
            return status

    st["done"] = True
    return TickStatus.SUCCESS


STEP_ACTIONS = {
    "restart_scratch": restart_scratch,
    "connect_fallback": connect_fallback,
    "handover": handover,
    "promote": promote,
    "recover_dependency": recover_dependency,
}
