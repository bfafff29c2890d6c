"""
Tick engine
===========

Reactive (memoryless) semantics: every tick re-evaluates the tree from the
root, left to right. Composites keep no "current child"; only the retry and
timeout decorators carry state between ticks.

    sequence  -> first non-Success child status, else Success
    fallback  -> first non-Failure child status, else Failure
    parallel  -> Success at >= threshold successes, Failure once that is
                 impossible, else Running (all children ticked)
    inverter  -> swaps Success/Failure, passes Running
    retry     -> re-ticks a failing child within the same tick until its
                 attempt budget is spent; budget refills on child Success
    timeout   -> Failure once the child has been Running longer than budget
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

from behavior.nodes import BTNode, NodeKind, TickStatus
from errors import ConfigurationError, TickOrderError

logger = logging.getLogger(__name__)

Handler = Callable[[BTNode, "TickContext"], Any]


@dataclass
class TickContext:
    sim_time: int
    blackboard: dict = field(default_factory=dict)
    predicates: Mapping[str, Handler] = field(default_factory=dict)
    actions: Mapping[str, Handler] = field(default_factory=dict)
    visited: Optional[list] = None  # node names in tick order, when tracing


def tick(tree: BTNode, ctx: TickContext) -> TickStatus:
    """
    Tick a validated tree once.

    Raises:
        TickOrderError: ctx.sim_time is older than the tree's previous tick.
        ConfigurationError: a leaf id is not registered in the context.
    """
    if tree.last_tick is not None and ctx.sim_time < tree.last_tick:
        raise TickOrderError(
            f"tree '{tree.name}' ticked at {ctx.sim_time} ms after {tree.last_tick} ms")
    tree.last_tick = ctx.sim_time
    return _tick(tree, ctx)


def _tick(node: BTNode, ctx: TickContext) -> TickStatus:
    if ctx.visited is not None:
        ctx.visited.append(node.name)

    kind = node.kind

    if kind is NodeKind.SEQUENCE:
        for child in node.children:
            status = _tick(child, ctx)
            if status is not TickStatus.SUCCESS:
                return status
        return TickStatus.SUCCESS

    if kind is NodeKind.FALLBACK:
        for child in node.children:
            status = _tick(child, ctx)
            if status is not TickStatus.FAILURE:
                return status
        return TickStatus.FAILURE

    if kind is NodeKind.PARALLEL:
        statuses = [_tick(child, ctx) for child in node.children]
        successes = statuses.count(TickStatus.SUCCESS)
        failures = statuses.count(TickStatus.FAILURE)
        if successes >= node.threshold:
            return TickStatus.SUCCESS
        if len(statuses) - failures < node.threshold:
            return TickStatus.FAILURE
        return TickStatus.RUNNING

    if kind is NodeKind.INVERTER:
        status = _tick(node.children[0], ctx)
        if status is TickStatus.SUCCESS:
            return TickStatus.FAILURE
        if status is TickStatus.FAILURE:
            return TickStatus.SUCCESS
        return status

    if kind is NodeKind.RETRY:
        while True:
            status = _tick(node.children[0], ctx)
            if status is not TickStatus.FAILURE:
                if status is TickStatus.SUCCESS:
                    node.attempts = 0
                return status
            node.attempts += 1
            if node.attempts >= node.max_attempts:
                return TickStatus.FAILURE
            logger.debug("retry '%s': attempt %d/%d", node.name, node.attempts + 1, node.max_attempts)

    if kind is NodeKind.TIMEOUT:
        status = _tick(node.children[0], ctx)
        if status is not TickStatus.RUNNING:
            node.running_since = None
            return status
        if node.running_since is None:
            node.running_since = ctx.sim_time
        if ctx.sim_time - node.running_since > node.budget:
            return TickStatus.FAILURE
        return TickStatus.RUNNING

    if kind is NodeKind.CONDITION:
        handler = ctx.predicates.get(node.ref)
        if handler is None:
            raise ConfigurationError(f"condition '{node.name}': unknown predicate id '{node.ref}'")
        return _as_status(handler(node, ctx))

    if kind is NodeKind.ACTION:
        handler = ctx.actions.get(node.ref)
        if handler is None:
            raise ConfigurationError(f"action '{node.name}': unknown action id '{node.ref}'")
        return _as_status(handler(node, ctx))

    raise ConfigurationError(f"node '{node.name}': unsupported kind {kind!r}")


def _as_status(value) -> TickStatus:
    if isinstance(value, TickStatus):
        return value
    return TickStatus.SUCCESS if value else TickStatus.FAILURE
