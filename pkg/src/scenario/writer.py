"""
Scenario serializer
===================

Writes a ScenarioSpec back in the scenario format. Every value is written
explicitly (profile fields, leaf defaults, cluster parameters), so parsing the
output yields a structurally equal spec. Conditional monitors come out in their
expanded Fallback(Inverter(guard), monitored) form.
"""

from behavior import BTNode, NodeKind
from scenario.model import DURATION, FORMAT_VERSION, LEAF_SCHEMAS, ScenarioSpec, format_duration
from workloads.profiles import LIVE_MODES
from workloads.tasks import TaskKind

INDENT = "  "


def _num(value) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _cluster_lines(params) -> list:
    return [
        "cluster:",
        f"{INDENT}pod_restart_latency: {format_duration(params.pod_restart_latency)}",
        f"{INDENT}policy_patch_latency: {format_duration(params.policy_patch_latency)}",
        f"{INDENT}cpu_sample_period: {format_duration(params.cpu_sample_period)}",
        f"{INDENT}latency_jitter: {_num(params.latency_jitter)}",
        f"{INDENT}cpu_noise: {_num(params.cpu_noise)}",
        f"{INDENT}monitor_cpu: {int(params.monitor_cpu)}",
        f"{INDENT}mitigation_cpu: {int(params.mitigation_cpu)}",
    ]


def _workload_lines(decl) -> list:
    p = decl.profile
    lines = [
        f"workload {decl.name}:",
        f"{INDENT}kind: {p.kind.value}",
        f"{INDENT}startup_time: {format_duration(p.startup_time)}",
        f"{INDENT}init_time: {format_duration(p.init_time)}",
        f"{INDENT}handover_time: {format_duration(p.handover_time)}",
        f"{INDENT}max_speed: {_num(p.max_speed)}",
        f"{INDENT}max_turn_rate: {_num(p.max_turn_rate)}",
        f"{INDENT}joint_speed_limit: {_num(p.joint_speed_limit)}",
        f"{INDENT}topics: " + ", ".join(f"{t}@{_num(r)}" for t, r in p.topics_out),
        f"{INDENT}cpu: " + ", ".join(f"{m.value}={int(p.cpu_by_mode[m])}" for m in LIVE_MODES
                                      if m in p.cpu_by_mode),
    ]
    if p.dependencies:
        lines.append(f"{INDENT}depends_on: " + ", ".join(p.dependencies))
    lines.append(f"{INDENT}fallback: {decl.fallback.value}")
    if decl.fallback_from:
        lines.append(f"{INDENT}fallback_from: {decl.fallback_from}")
    lines.append(f"{INDENT}managed: {'true' if decl.managed else 'false'}")
    return lines


def _task_lines(task) -> list:
    key = "goals" if task.kind is TaskKind.NAVIGATE_TO_GOALS else "targets"
    goals = "; ".join("(" + ", ".join(_num(c) for c in goal) + ")" for goal in task.goals)
    return [
        f"task {task.id}:",
        f"{INDENT}workload: {task.workload}",
        f"{INDENT}{key}: {goals}",
        f"{INDENT}at: {format_duration(task.submit_at)}",
    ]


def _leaf_text(node: BTNode) -> str:
    schema = LEAF_SCHEMAS[node.ref]
    parts = [node.ref] + [str(node.arg(name)) for name in schema.positional]
    for key, kind, _ in schema.keywords:
        value = node.arg(key)
        parts.append(f"{key}={format_duration(value) if kind == DURATION else _num(value)}")
    return " ".join(parts)


def _node_lines(node: BTNode, depth: int) -> list:
    pad = INDENT * depth
    if node.kind.is_leaf:
        return [f"{pad}{node.kind.value} {node.name}: {_leaf_text(node)}"]

    lines = [f"{pad}{node.kind.value} {node.name}:"]
    inner = INDENT * (depth + 1)
    if node.kind is NodeKind.PARALLEL:
        lines.append(f"{inner}threshold: {node.threshold}")
    elif node.kind is NodeKind.RETRY:
        lines.append(f"{inner}max_attempts: {node.max_attempts}")
    elif node.kind is NodeKind.TIMEOUT:
        lines.append(f"{inner}budget: {format_duration(node.budget)}")
    for child in node.children:
        lines.extend(_node_lines(child, depth + 1))
    return lines


def serialize_scenario(spec: ScenarioSpec) -> str:
    lines = [
        f"version: {FORMAT_VERSION}",
        f"scenario: {spec.name}",
        f"duration: {format_duration(spec.duration)}",
        "",
    ]
    lines += _cluster_lines(spec.cluster_params) + [""]
    for decl in spec.workloads:
        lines += _workload_lines(decl) + [""]
    for task in spec.tasks:
        lines += _task_lines(task) + [""]
    if spec.monitors is not None:
        lines += ["monitor:"] + _node_lines(spec.monitors, 1) + [""]
    for key, tree in spec.mitigation.items():
        lines += [f"mitigation {key}:"] + _node_lines(tree, 1) + [""]
    if spec.injections:
        lines.append("injections:")
        lines += [f"{INDENT}at {format_duration(i.at)}: {i.kind.value} {i.target}" for i in spec.injections]
        lines.append("")
    return "\n".join(lines)
