"""
Simulated plant
===============

Stand-in for the simulated robot: a unicycle mobile base and a rate-commanded
arm. Commands persist until overwritten. Commands that were delivered over the
network are guarded by a watchdog: once no fresh command arrived for
WATCHDOG_MS, the command decays to zero (this is what makes a silently
remapped command topic stop the robot).
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

MAX_LINEAR_SPEED = 1.0   # m/s
MAX_TURN_RATE = 1.5      # rad/s
MAX_JOINT_SPEED = 1.0    # rad/s
WATCHDOG_MS = 200
PLANT_STEP_MS = 10


def _clip(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


@dataclass(frozen=True)
class PlantState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v: float = 0.0
    omega: float = 0.0
    joint_pos: tuple = ()
    joint_cmd: tuple = ()
    # ms since the last delivered command; None = held command, no watchdog
    base_cmd_age: Optional[int] = None
    joint_cmd_age: Optional[int] = None

    @property
    def pose(self) -> tuple:
        return (self.x, self.y, self.theta)

    @property
    def speed(self) -> float:
        return abs(self.v)

    def with_base_command(self, v: float, omega: float) -> "PlantState":
        return replace(self, v=_clip(v, MAX_LINEAR_SPEED), omega=_clip(omega, MAX_TURN_RATE), base_cmd_age=0)

    def with_joint_command(self, cmd) -> "PlantState":
        cmd = tuple(_clip(c, MAX_JOINT_SPEED) for c in cmd)
        pos = self.joint_pos or tuple(0.0 for _ in cmd)
        return replace(self, joint_cmd=cmd, joint_pos=pos, joint_cmd_age=0)


def _integrate_base(x, y, theta, v, omega, seconds):
    # exact arc for a constant (v, omega) command
    if abs(omega) < 1e-12:
        return x + v * math.cos(theta) * seconds, y + v * math.sin(theta) * seconds, theta
    new_theta = theta + omega * seconds
    radius = v / omega
    x += radius * (math.sin(new_theta) - math.sin(theta))
    y -= radius * (math.cos(new_theta) - math.cos(theta))
    return x, y, new_theta


def _active_span(age: Optional[int], dt: int) -> int:
    """How many of the next dt ms the command is still valid for."""
    if age is None:
        return dt
    return max(0, min(dt, WATCHDOG_MS - age))


def step_plant(state: PlantState, dt: int) -> PlantState:
    """
    Advance the plant by dt milliseconds.

    Args:
        state: current plant state
        dt: step length in ms, > 0

    Returns:
        New PlantState; commands that outlived the watchdog are zeroed.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0 ms, got {dt}")

    v = _clip(state.v, MAX_LINEAR_SPEED)
    omega = _clip(state.omega, MAX_TURN_RATE)
    span = _active_span(state.base_cmd_age, dt)
    x, y, theta = _integrate_base(state.x, state.y, state.theta, v, omega, span / 1000.0)
    base_age = None if state.base_cmd_age is None else state.base_cmd_age + dt
    if base_age is not None and base_age >= WATCHDOG_MS:
        v, omega = 0.0, 0.0

    joint_cmd = tuple(_clip(c, MAX_JOINT_SPEED) for c in state.joint_cmd)
    jspan = _active_span(state.joint_cmd_age, dt) / 1000.0
    joint_pos = tuple(p + c * jspan for p, c in zip(state.joint_pos, joint_cmd))
    joint_age = None if state.joint_cmd_age is None else state.joint_cmd_age + dt
    if joint_age is not None and joint_age >= WATCHDOG_MS:
        joint_cmd = tuple(0.0 for _ in joint_cmd)

    return PlantState(
        x=x, y=y, theta=theta, v=v, omega=omega,
        joint_pos=joint_pos, joint_cmd=joint_cmd,
        base_cmd_age=base_age, joint_cmd_age=joint_age,
    )
