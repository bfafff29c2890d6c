"""
Scenario parser
===============

Indentation-delimited block format, one statement per line, `key: value`
pairs and `#` comments (schema in QUICK_REFERENCE.md).

The parser never returns a partial result: it collects every problem it finds
as a positioned Diagnostic and raises ScenarioParseError with all of them.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from behavior import BTNode, NodeKind, validate, walk
from cluster.cluster import ClusterParams
from errors import ScenarioParseError
from monitoring.composition import FAILURE_CLASS_OF, conditional_monitor
from monitoring.events import FailureClass
from scenario.model import (
    DURATION,
    FORMAT_VERSION,
    LEAF_SCHEMAS,
    REFERENCE_PARAMS,
    FailureInjection,
    InjectionKind,
    MitigationKey,
    ScenarioSpec,
    WorkloadDecl,
    is_identifier,
)
from workloads.profiles import FALLBACK_LEVELS, LIVE_MODES, LifecycleMode, WorkloadKind, default_profile
from workloads.tasks import TaskKind, TaskRequest

logger = logging.getLogger(__name__)

DURATION_RE = re.compile(r"^(\d+)(ms|s)$")
GOAL_RE = re.compile(r"^\((.*)\)$")

PARAM_KEYS = {
    "threshold": NodeKind.PARALLEL,
    "max_attempts": NodeKind.RETRY,
    "budget": NodeKind.TIMEOUT,
}
INNER_KINDS = {k.value: k for k in NodeKind if not k.is_leaf}

CLUSTER_KEYS = {
    "pod_restart_latency": DURATION,
    "policy_patch_latency": DURATION,
    "cpu_sample_period": DURATION,
    "latency_jitter": float,
    "cpu_noise": float,
    "monitor_cpu": int,
    "mitigation_cpu": int,
}

WORKLOAD_KEYS = (
    "kind", "startup_time", "init_time", "handover_time", "max_speed", "max_turn_rate",
    "joint_speed_limit", "topics", "cpu", "depends_on", "fallback", "fallback_from", "managed",
)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"


@dataclass
class _Line:
    number: int
    indent: int
    text: str
    raw: str
    children: list = field(default_factory=list)

    def col(self, token: str = None, occurrence: int = 0) -> int:
        if token:
            pos = self.raw.find(token, self.indent)
            for _ in range(occurrence):
                if pos < 0:
                    break
                pos = self.raw.find(token, pos + len(token))
            if pos >= 0:
                return pos + 1
        return self.indent + 1


def _split_lines(text: str, diags: list) -> list:
    root = _Line(0, -1, "", "")
    stack = [root]
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].rstrip()
        if not content.strip():
            continue
        leading = content[:len(content) - len(content.lstrip())]
        if "\t" in leading:
            diags.append(Diagnostic(number, 1, "tabs are not allowed for indentation"))
            continue
        indent = len(leading)
        line = _Line(number, indent, content.strip(), raw)
        while stack[-1].indent >= indent:
            stack.pop()
        stack[-1].children.append(line)
        stack.append(line)
    return root.children


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.diags = []
        self.node_lines = {}
        self.workload_keys = {}

    # ---------- helpers ----------

    def error(self, line: _Line, message: str, token: str = None, occurrence: int = 0) -> None:
        self.diags.append(Diagnostic(line.number, line.col(token, occurrence), message))

    def key_value(self, line: _Line):
        key, sep, value = line.text.partition(":")
        if not sep or len(key.split()) != 1:
            self.error(line, f"expected 'key: value', got '{line.text}'")
            return None, None
        return key.strip(), value.strip()

    def duration(self, line: _Line, value: str) -> Optional[int]:
        match = DURATION_RE.match(value)
        if not match:
            self.error(line, f"duration '{value}' needs an integer with an ms or s suffix", value)
            return None
        amount, unit = int(match.group(1)), match.group(2)
        return amount * 1000 if unit == "s" else amount

    def number(self, line: _Line, value: str, kind=float):
        try:
            return kind(value)
        except ValueError:
            self.error(line, f"expected {'an integer' if kind is int else 'a number'}, got '{value}'", value)
            return None

    def typed(self, line: _Line, value: str, kind):
        if kind == DURATION:
            return self.duration(line, value)
        return self.number(line, value, kind)

    def identifier(self, line: _Line, value: str, what: str) -> Optional[str]:
        if not is_identifier(value):
            self.error(line, f"invalid {what} '{value}'", value or None)
            return None
        return value

    def no_block(self, line: _Line) -> None:
        if line.children:
            self.error(line.children[0], "unexpected indented block")

    # ---------- document ----------

    def parse(self) -> ScenarioSpec:
        header = {}
        workloads, tasks, injections = [], [], []
        injections_line = cluster_line = None
        workload_lines, task_lines = {}, {}
        monitor_line, mitigation_lines = None, []
        cluster = ClusterParams()

        for line in _split_lines(self.text, self.diags):
            head, sep, value = line.text.partition(":")
            words = head.split()
            value = value.strip()
            if not sep or not words:
                self.error(line, f"expected a statement or block header, got '{line.text}'")
                continue
            keyword = words[0]

            if keyword in ("version", "scenario", "duration") and len(words) == 1:
                self.no_block(line)
                if keyword in header:
                    self.error(line, f"duplicate '{keyword}'")
                header[keyword] = (line, value)
            elif keyword == "cluster" and len(words) == 1:
                if cluster_line is not None:
                    self.error(line, "duplicate 'cluster' block", keyword)
                    continue
                cluster_line = line
                cluster = self.parse_cluster(line, value)
            elif keyword == "workload" and len(words) == 2:
                decl = self.parse_workload(line, words[1], value)
                if decl is not None:
                    if decl.name in workload_lines:
                        self.error(line, f"duplicate workload '{decl.name}'", decl.name)
                    else:
                        workloads.append(decl)
                        workload_lines[decl.name] = line
            elif keyword == "task" and len(words) == 2:
                task_lines.setdefault(words[1], []).append(line)
            elif keyword == "monitor" and len(words) == 1:
                if monitor_line is not None:
                    self.error(line, "duplicate 'monitor' block")
                monitor_line = line
            elif keyword == "mitigation" and len(words) == 2:
                mitigation_lines.append((line, words[1]))
            elif keyword == "injections" and len(words) == 1:
                if injections_line is not None:
                    self.error(line, "duplicate 'injections' block", keyword)
                    continue
                injections_line = line
            else:
                self.error(line, f"unknown statement '{head.strip()}'", keyword)

        version = self.parse_header(header, "version", lambda l, v: self.number(l, v, int))
        if version is not None and version != FORMAT_VERSION:
            self.error(header["version"][0], f"unsupported version {version}, expected {FORMAT_VERSION}")
        name = self.parse_header(header, "scenario", lambda l, v: self.identifier(l, v, "scenario name"))
        duration = self.parse_header(header, "duration", self.duration)
        if duration is not None and duration <= 0:
            self.error(header["duration"][0], "duration must be > 0")
            duration = None

        names = {d.name: d for d in workloads}
        self.check_workloads(workloads, workload_lines)

        for task_id, lines in task_lines.items():
            for dup in lines[1:]:
                self.error(dup, f"duplicate task '{task_id}'", task_id)
            task = self.parse_task(lines[0], task_id, names, duration)
            if task is not None:
                tasks.append(task)

        spec_for_refs = ScenarioSpec(name or "_", duration or 1, workloads=workloads)

        monitors = None
        if monitor_line is not None:
            monitors = self.parse_tree(monitor_line, spec_for_refs, monitor=True)

        mitigation = {}
        for line, key_text in mitigation_lines:
            key = self.parse_mitigation_key(line, key_text, names)
            tree = self.parse_tree(line, spec_for_refs, monitor=False)
            if key is None or tree is None:
                continue
            if key in mitigation:
                self.error(line, f"duplicate mitigation block '{key}'", key_text)
            mitigation[key] = tree

        if injections_line is not None:
            self.no_value(injections_line)
            injections = self.parse_injections(injections_line, spec_for_refs, duration)

        if self.diags:
            raise ScenarioParseError(sorted(self.diags, key=lambda d: (d.line, d.column)))

        return ScenarioSpec(
            name=name, duration=duration, workloads=workloads, tasks=tasks,
            monitors=monitors, mitigation=mitigation, injections=injections,
            cluster_params=cluster,
        )

    def no_value(self, line: _Line) -> None:
        if line.text.partition(":")[2].strip():
            self.error(line, "block header takes no value")

    def parse_header(self, header: dict, key: str, convert):
        if key not in header:
            self.diags.append(Diagnostic(1, 1, f"missing '{key}:' header"))
            return None
        line, value = header[key]
        return convert(line, value)

    # ---------- cluster ----------

    def parse_cluster(self, line: _Line, value: str) -> ClusterParams:
        if value:
            self.error(line, "block header takes no value")
        values, seen = {}, set()
        for child in line.children:
            self.no_block(child)
            key, raw = self.key_value(child)
            if key is None:
                continue
            if key not in CLUSTER_KEYS:
                self.error(child, f"unknown cluster key '{key}'", key)
                continue
            if key in seen:
                self.error(child, f"duplicate key '{key}'", key)
                continue
            seen.add(key)
            parsed = self.typed(child, raw, CLUSTER_KEYS[key])
            if parsed is not None:
                values[key] = parsed
        params = ClusterParams(**values)
        for problem in params.problems():
            self.error(line, problem)
        return params

    # ---------- workloads ----------

    def parse_workload(self, line: _Line, name: str, value: str) -> Optional[WorkloadDecl]:
        if value:
            self.error(line, "block header takes no value")
        if self.identifier(line, name, "workload name") is None:
            return None
        entries = {}
        for child in line.children:
            self.no_block(child)
            key, raw = self.key_value(child)
            if key is None:
                continue
            if key not in WORKLOAD_KEYS:
                self.error(child, f"unknown workload key '{key}'", key)
                continue
            if key in entries:
                self.error(child, f"duplicate key '{key}'", key)
                continue
            entries[key] = (child, raw)

        if "kind" not in entries:
            self.error(line, f"workload '{name}' has no kind")
            return None
        kind_line, kind_raw = entries.pop("kind")
        try:
            kind = WorkloadKind(kind_raw)
        except ValueError:
            self.error(kind_line, f"unknown workload kind '{kind_raw}'", kind_raw)
            return None

        base = default_profile(kind)
        overrides = {}
        decl = WorkloadDecl(name, base)

        for key, (child, raw) in entries.items():
            if key in ("startup_time", "init_time", "handover_time"):
                ms = self.duration(child, raw)
                if ms is not None:
                    overrides[key] = ms
            elif key in ("max_speed", "max_turn_rate", "joint_speed_limit"):
                number = self.number(child, raw)
                if number is not None:
                    if number <= 0:
                        self.error(child, f"{key} must be > 0", raw)
                    overrides[key] = number
            elif key == "topics":
                topics = self.parse_topics(child, raw)
                if topics:
                    overrides["topics_out"] = topics
            elif key == "cpu":
                table = self.parse_cpu(child, raw, dict(base.cpu_by_mode))
                if table is not None:
                    overrides["cpu_by_mode"] = table
            elif key == "depends_on":
                deps = tuple(d.strip() for d in raw.split(",") if d.strip())
                for dep in deps:
                    self.identifier(child, dep, "workload name")
                overrides["dependencies"] = deps
            elif key == "fallback":
                try:
                    level = LifecycleMode.parse(raw)
                except ValueError:
                    level = None
                if level not in FALLBACK_LEVELS:
                    self.error(child, f"'{raw}' is not a fallback level", raw)
                else:
                    decl.fallback = level
            elif key == "fallback_from":
                decl.fallback_from = self.identifier(child, raw, "workload name")
            elif key == "managed":
                if raw not in ("true", "false"):
                    self.error(child, f"managed must be true or false, got '{raw}'", raw)
                decl.managed = raw == "true"

        decl.profile = base.with_overrides(**overrides)
        self.workload_keys[name] = {k: c for k, (c, _) in entries.items()}
        return decl

    def parse_topics(self, line: _Line, raw: str) -> tuple:
        topics = []
        for item in (i.strip() for i in raw.split(",")):
            topic, sep, rate = item.partition("@")
            if not sep or self.identifier(line, topic, "topic") is None:
                self.error(line, f"expected 'topic@rate', got '{item}'", item or None)
                continue
            hz = self.number(line, rate)
            if hz is None:
                continue
            if hz <= 0:
                self.error(line, f"rate of '{topic}' must be > 0 Hz", rate)
                continue
            topics.append((topic, hz))
        return tuple(topics)

    def parse_cpu(self, line: _Line, raw: str, table: dict) -> Optional[dict]:
        for item in (i.strip() for i in raw.split(",")):
            mode_text, sep, amount = item.partition("=")
            try:
                mode = LifecycleMode.parse(mode_text)
            except ValueError:
                mode = None
            if not sep or mode not in LIVE_MODES:
                self.error(line, f"expected '<mode>=<mCPU>', got '{item}'", item or None)
                return None
            value = self.number(line, amount.strip(), int)
            if value is None:
                return None
            if value < 0:
                self.error(line, f"CPU of {mode.value} must be >= 0", amount)
            table[mode] = value
        return table

    def check_workloads(self, workloads: list, lines: dict) -> None:
        names = {d.name: d for d in workloads}
        topic_owner = {}
        for decl in workloads:
            line = lines[decl.name]
            sub = self.workload_keys.get(decl.name, {})
            for topic in decl.profile.topics:
                if topic in topic_owner:
                    self.error(sub.get("topics", line),
                               f"duplicate topic '{topic}' (also published by '{topic_owner[topic]}')", topic)
                topic_owner.setdefault(topic, decl.name)
            for dep in decl.profile.dependencies:
                if dep not in names:
                    self.error(sub.get("depends_on", line), f"dangling reference: workload '{dep}'", dep)
                elif dep == decl.name:
                    self.error(sub.get("depends_on", line), f"workload '{dep}' depends on itself", dep)
            if decl.fallback_from is not None:
                source = names.get(decl.fallback_from)
                at = sub.get("fallback_from", line)
                if source is None:
                    self.error(at, f"dangling reference: workload '{decl.fallback_from}'", decl.fallback_from)
                elif source is decl or source.profile.kind is not decl.profile.kind:
                    self.error(at, f"'{decl.name}' cannot share the fallback of '{source.name}'", source.name)
                elif LifecycleMode.POD_STARTED is not source.fallback or LifecycleMode.POD_STARTED is not decl.fallback:
                    self.error(at, "shared fallbacks are only allowed at the pod_started level")

        # circular dependencies
        state = {}

        def visit(name, path):
            if state.get(name) == "done" or name not in names:
                return
            if state.get(name) == "active":
                self.error(lines[name], "circular dependency: " + " -> ".join(path + [name]), name)
                return
            state[name] = "active"
            for dep in names[name].profile.dependencies:
                visit(dep, path + [name])
            state[name] = "done"

        for decl in workloads:
            visit(decl.name, [])

    # ---------- tasks ----------

    def parse_task(self, line: _Line, task_id: str, workloads: dict, duration) -> Optional[TaskRequest]:
        self.no_value(line)
        if self.identifier(line, task_id, "task id") is None:
            return None
        entries = {}
        for child in line.children:
            self.no_block(child)
            key, raw = self.key_value(child)
            if key is None:
                continue
            if key not in ("workload", "goals", "targets", "at"):
                self.error(child, f"unknown task key '{key}'", key)
                continue
            if key in entries:
                self.error(child, f"duplicate key '{key}'", key)
                continue
            entries[key] = (child, raw)

        if "workload" not in entries:
            self.error(line, f"task '{task_id}' has no workload")
            return None
        wl_line, wl_name = entries["workload"]
        decl = workloads.get(wl_name)
        if decl is None:
            self.error(wl_line, f"dangling reference: workload '{wl_name}'", wl_name)
            return None

        kind = decl.profile.kind
        key = {WorkloadKind.NAVIGATION: "goals", WorkloadKind.MANIPULATION: "targets"}.get(kind)
        if key is None:
            self.error(wl_line, f"{kind.value} workloads do not take tasks", wl_name)
            return None
        wrong = "targets" if key == "goals" else "goals"
        if wrong in entries:
            self.error(entries[wrong][0], f"{kind.value} tasks use '{key}', not '{wrong}'", wrong)
            return None
        if key not in entries:
            self.error(line, f"task '{task_id}' has no {key}")
            return None

        goal_line, raw = entries[key]
        goals = self.parse_goals(goal_line, raw, kind)
        if goals is None:
            return None

        submit_at = 0
        if "at" in entries:
            at_line, at_raw = entries["at"]
            submit_at = self.duration(at_line, at_raw)
            if submit_at is None:
                return None
            if duration is not None and submit_at >= duration:
                self.error(at_line, f"task submitted at {at_raw}, after the scenario ends", at_raw)

        task_kind = TaskKind.NAVIGATE_TO_GOALS if key == "goals" else TaskKind.MOVE_ARM_TO_TARGETS
        return TaskRequest(task_id, wl_name, task_kind, goals, submit_at)

    def parse_goals(self, line: _Line, raw: str, kind: WorkloadKind) -> Optional[tuple]:
        goals = []
        for item in (i.strip() for i in raw.split(";")):
            match = GOAL_RE.match(item)
            if not match:
                self.error(line, f"expected '(a, b, ...)', got '{item}'", item or None)
                return None
            values = []
            for part in match.group(1).split(","):
                number = self.number(line, part.strip())
                if number is None:
                    return None
                values.append(number)
            goals.append(tuple(values))
        if not goals:
            self.error(line, "goal list is empty")
            return None
        if kind is WorkloadKind.NAVIGATION and any(len(g) not in (2, 3) for g in goals):
            self.error(line, "navigation goals are (x, y) or (x, y, theta)")
            return None
        if kind is WorkloadKind.MANIPULATION and len({len(g) for g in goals}) != 1:
            self.error(line, "all joint targets need the same number of joints")
            return None
        return tuple(goals)

    # ---------- trees ----------

    def parse_mitigation_key(self, line: _Line, text: str, workloads: dict) -> Optional[MitigationKey]:
        class_text, _, workload = text.partition("@")
        try:
            failure_class = FailureClass(class_text)
        except ValueError:
            self.error(line, f"unknown failure class '{class_text}'", class_text or None)
            return None
        if workload and workload not in workloads:
            self.error(line, f"dangling reference: workload '{workload}'", workload)
            return None
        return MitigationKey(failure_class, workload or None)

    def parse_tree(self, block: _Line, spec: ScenarioSpec, monitor: bool) -> Optional[BTNode]:
        self.no_value(block)
        if len(block.children) != 1:
            self.error(block, f"block needs exactly one root node, found {len(block.children)}")
            return None
        self.node_lines = {}
        tree = self.parse_node(block.children[0])
        if tree is None:
            return None

        for issue in validate(tree):
            line = self.node_lines.get(issue.node, block)
            self.error(line, issue.message, issue.node)
        for node in walk(tree):
            if node.kind.is_leaf:
                self.check_leaf(node, spec, monitor)
        return tree

    def parse_node(self, line: _Line) -> Optional[BTNode]:
        head, sep, rest = line.text.partition(":")
        words = head.split()
        if not sep or len(words) != 2:
            self.error(line, f"expected '<kind> <name>:', got '{line.text}'")
            return None
        kind_word, name = words
        if self.identifier(line, name, "node name") is None:
            return None
        self.node_lines.setdefault(name, line)

        if kind_word in ("condition", "action"):
            self.no_block(line)
            return self.parse_leaf(line, kind_word, name, rest.strip())

        if kind_word != "conditional" and kind_word not in INNER_KINDS:
            self.error(line, f"unknown node kind '{kind_word}'", kind_word)
            return None
        if rest.strip():
            self.error(line, f"unexpected text after '{name}:'", rest.strip())

        params, children = {}, []
        for child in line.children:
            child_head = child.text.partition(":")[0].split()
            if len(child_head) == 1 and child_head[0] in PARAM_KEYS:
                key, raw = self.key_value(child)
                self.no_block(child)
                if PARAM_KEYS[key].value != kind_word:
                    self.error(child, f"'{key}' does not apply to {kind_word}", key)
                    continue
                if key in params:
                    self.error(child, f"duplicate parameter '{key}'", key)
                    continue
                value = self.typed(child, raw, DURATION if key == "budget" else int)
                if value is not None:
                    params[key] = value
            else:
                node = self.parse_node(child)
                if node is None:
                    return None
                children.append(node)

        if kind_word == "conditional":
            if len(children) != 2:
                self.error(line, f"conditional '{name}' needs a guard and a monitored node, has {len(children)}", name)
                return None
            guard_name = f"{name}_guard"
            self.node_lines.setdefault(guard_name, line)
            return conditional_monitor(children[0], children[1], name=name)

        return BTNode(INNER_KINDS[kind_word], name, tuple(children), **params)

    def parse_leaf(self, line: _Line, kind_word: str, name: str, spec_text: str) -> Optional[BTNode]:
        tokens = spec_text.split()
        if not tokens:
            self.error(line, f"{kind_word} '{name}' has no id")
            return None
        ref = tokens[0]
        schema = LEAF_SCHEMAS.get(ref)
        if schema is None or schema.kind != kind_word:
            what = "predicate" if kind_word == "condition" else "action"
            self.error(line, f"unknown {what} id '{ref}'", ref)
            return None

        positional = [t for t in tokens[1:] if "=" not in t]
        keywords = {}
        for i, token in enumerate(tokens[1:], start=1):
            if "=" in token:
                key, _, raw = token.partition("=")
                if key in keywords:
                    earlier = tokens[1:i].count(token)
                    self.error(line, f"duplicate parameter '{key}' for '{ref}'", token, earlier)
                    return None
                keywords[key] = (token, raw)

        if len(positional) != len(schema.positional):
            self.error(line, f"'{ref}' takes {len(schema.positional)} argument(s) "
                             f"({', '.join(schema.positional)}), got {len(positional)}", ref)
            return None
        args = []
        for pname, value in zip(schema.positional, positional):
            if self.identifier(line, value, pname) is None:
                return None
            args.append((pname, value))

        known = {k for k, _, _ in schema.keywords}
        for key, (token, _) in keywords.items():
            if key not in known:
                self.error(line, f"unknown parameter '{key}' for '{ref}'", token)
                return None
        for key, kind, default in schema.keywords:
            if key in keywords:
                value = self.typed(line, keywords[key][1], kind)
                if value is None:
                    return None
                if value < 0 or (value == 0 and key != "noise"):
                    self.error(line, f"{key} out of range: {keywords[key][1]}", keywords[key][0])
                    return None
            elif default is None:
                self.error(line, f"'{ref}' requires {key}=", ref)
                return None
            else:
                value = default
            args.append((key, value))

        return BTNode(NodeKind(kind_word), name, ref=ref, args=tuple(args))

    def check_leaf(self, node: BTNode, spec: ScenarioSpec, monitor: bool) -> None:
        line = self.node_lines.get(node.name)
        if monitor and node.kind is NodeKind.ACTION:
            self.error(line, f"action '{node.name}' in the monitor tree", node.name)
        if not monitor and node.ref in FAILURE_CLASS_OF:
            self.error(line, f"monitor condition '{node.name}' in a mitigation tree", node.name)

        for key, value in node.args:
            target = REFERENCE_PARAMS.get(key)
            if target == "topic" and spec.publisher_of(value) is None:
                self.error(line, f"dangling reference: topic '{value}' is not published by any workload", value)
            elif target == "workload" and value not in spec.workload_names():
                self.error(line, f"dangling reference: workload '{value}'", value)

        if node.ref == "frequency":
            publisher = spec.publisher_of(node.arg("topic"))
            if publisher is not None:
                period = spec.workload(publisher).profile.period_of(node.arg("topic"))
                if node.arg("window") < period:
                    self.error(line, f"window {node.arg('window')} ms is shorter than the "
                                     f"publication period ({period} ms)", node.name)

    # ---------- injections ----------

    def parse_injections(self, block: _Line, spec: ScenarioSpec, duration) -> list:
        injections = []
        for line in block.children:
            self.no_block(line)
            head, sep, rest = line.text.partition(":")
            words, action = head.split(), rest.split()
            if not sep or len(words) != 2 or words[0] != "at" or len(action) != 2:
                self.error(line, f"expected 'at <time>: <kind> <target>', got '{line.text}'")
                continue
            at = self.duration(line, words[1])
            try:
                kind = InjectionKind(action[0])
            except ValueError:
                self.error(line, f"unknown injection kind '{action[0]}'", action[0])
                continue
            target = action[1]
            if kind is InjectionKind.DELETE_POD and target not in spec.workload_names():
                self.error(line, f"dangling reference: workload '{target}'", target)
                continue
            if kind is InjectionKind.SILENT_REMAP and spec.publisher_of(target) is None:
                self.error(line, f"dangling reference: topic '{target}' is not published by any workload", target)
                continue
            if at is None:
                continue
            if duration is not None and not 0 <= at < duration:
                self.error(line, f"injection at {words[1]} is outside [0, duration)", words[1])
                continue
            injections.append(FailureInjection(at, kind, target))
        return injections


def parse_scenario(text: str) -> ScenarioSpec:
    """
    Parse a scenario document.

    Raises:
        ScenarioParseError: with every positioned diagnostic found.
    """
    return _Parser(text).parse()
