"""
External supervision
====================

Compares what the robot was told to do (the speed in the last velocity command
the monitor saw) with what an external sensor sees it doing (a least-squares
speed fit over the trailing marker poses). A discrepancy above the tolerance
that persists for `sustain` ms is a BehaviorDiscrepancy failure.

Noise model and tolerance
-------------------------
The marker sensor reports positions with isotropic Gaussian noise of radial
standard deviation sigma, i.e. sigma / sqrt(2) per axis. Over 5 samples 100 ms
apart the slope of a least-squares fit has per-axis standard deviation

    s = (sigma / sqrt(2)) / sqrt(sum (t_i - t_mean)^2) = 0.00707 / sqrt(0.1) = 0.0224 m/s

for sigma = 0.01 m. A stationary robot's fitted speed is Rayleigh(s), so

    P(speed > 0.1 m/s) = exp(-0.1^2 / (2 s^2)) = exp(-10) ~ 4.5e-5

per tick, and a false alarm needs that for 5 consecutive ticks. The default
tolerance 0.1 m/s is therefore well above the noise-induced speed error.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from behavior import BTNode, TickStatus, condition
from monitoring.events import MONITOR_PERIOD_MS

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.1        # m/s
DEFAULT_SUSTAIN_MS = 500
DEFAULT_NOISE_SIGMA = 0.01     # m
DEFAULT_SENSOR_RATE = 10.0     # Hz
FIT_SAMPLES = 5
MIN_FIT_SPAN_MS = 200
COMMAND_FRESHNESS_MS = 200


@dataclass(frozen=True)
class SupervisionSpec:
    commanded_topic: str
    observed_pose_topic: str
    speed_tolerance: float = DEFAULT_TOLERANCE
    sustain: int = DEFAULT_SUSTAIN_MS
    sensor_noise_sigma: float = DEFAULT_NOISE_SIGMA
    sensor_rate: float = DEFAULT_SENSOR_RATE

    @property
    def sensor_period(self) -> int:
        return round(1000 / self.sensor_rate)


def estimate_observed_velocity(poses) -> Optional[float]:
    """
    Fitted speed magnitude over the trailing FIT_SAMPLES poses.

    Args:
        poses: sequence of (t_ms, x, y), oldest first

    Returns:
        Speed in m/s, or None (abstain) with fewer than 2 poses or a span
        shorter than MIN_FIT_SPAN_MS.
    """
    poses = list(poses)[-FIT_SAMPLES:]
    if len(poses) < 2 or poses[-1][0] - poses[0][0] < MIN_FIT_SPAN_MS:
        return None

    data = np.asarray(poses, dtype=float)
    t = (data[:, 0] - data[0, 0]) / 1000.0
    vx = np.polyfit(t, data[:, 1], 1)[0]
    vy = np.polyfit(t, data[:, 2], 1)[0]
    return float(math.hypot(vx, vy))


class MarkerSensor:
    """External pose sensor (a marker tracked by a camera), seeded noise."""

    def __init__(self, rng, sigma: float = DEFAULT_NOISE_SIGMA, topic: str = "marker_pose"):
        self.rng = rng
        self.sigma = sigma
        self.topic = topic

    def read(self, plant) -> tuple:
        per_axis = self.sigma / math.sqrt(2.0)
        nx, ny = self.rng.normal(0.0, per_axis, size=2) if per_axis > 0 else (0.0, 0.0)
        return plant.x + float(nx), plant.y + float(ny)


def supervision_condition(spec: SupervisionSpec, name: str = None) -> BTNode:
    return condition(
        name or f"{spec.commanded_topic}_supervision", "supervision",
        commanded_topic=spec.commanded_topic,
        observed_pose_topic=spec.observed_pose_topic,
        tolerance=float(spec.speed_tolerance),
        sustain=int(spec.sustain),
        noise=float(spec.sensor_noise_sigma),
        rate=float(spec.sensor_rate),
    )


def spec_of(node: BTNode) -> SupervisionSpec:
    return SupervisionSpec(
        node.arg("commanded_topic"), node.arg("observed_pose_topic"),
        node.arg("tolerance", DEFAULT_TOLERANCE), node.arg("sustain", DEFAULT_SUSTAIN_MS),
        node.arg("noise", DEFAULT_NOISE_SIGMA), node.arg("rate", DEFAULT_SENSOR_RATE),
    )


def commanded_speed(log, topic: str, now: int) -> float:
    last = log.last(topic)
    if last is None or now - last.t > COMMAND_FRESHNESS_MS:
        return 0.0
    return abs(last.data.get("v", 0.0))


def supervision_predicate(node: BTNode, ctx) -> TickStatus:
    spec = spec_of(node)
    now = ctx.sim_time
    log = ctx.blackboard["topics"]
    state = ctx.blackboard.setdefault("supervision", {}).setdefault(node.name, {})

    # a gap in ticking (guard was off) restarts the sustain clock
    if state.get("last") is None or now - state["last"] > MONITOR_PERIOD_MS:
        state["since"] = None
    state["last"] = now

    poses = [(m.t, m.data["x"], m.data["y"]) for m in log.recent(spec.observed_pose_topic, FIT_SAMPLES, now)]
    observed = estimate_observed_velocity(poses)
    if observed is None:
        state["since"] = None
        return TickStatus.SUCCESS

    discrepancy = abs(commanded_speed(log, spec.commanded_topic, now) - observed)
    if discrepancy <= spec.speed_tolerance:
        state["since"] = None
        return TickStatus.SUCCESS

    if state["since"] is None:
        state["since"] = now
    if now - state["since"] >= spec.sustain:
        ctx.blackboard.setdefault("failing", []).append(node)
        return TickStatus.FAILURE
    return TickStatus.SUCCESS
