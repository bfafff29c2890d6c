"""
Workload profiles
=================

A profile is the static description of a simulated robotic workload: how long
it takes to start and initialize, which topics it publishes at which rate,
what it costs in milliCPU per lifecycle mode, and what it depends on.

Startup/init magnitudes are not published anywhere; the defaults below are
chosen so the strategy comparison keeps its shape (see DESIGN.md). Only the
0.6 uninitialized/active CPU ratio of the navigation stack is a measured value.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping


class WorkloadKind(Enum):
    NAVIGATION = "navigation"
    MANIPULATION = "manipulation"
    LOCALIZATION = "localization"


class LifecycleMode(Enum):
    SCRATCH = "scratch"                    # no instance provisioned (fallback level only)
    DOWN = "down"                          # pod gone or not yet running
    POD_STARTED = "pod_started"            # container up, application not launched ("uninitialized")
    STARTING = "starting"                  # application launching
    STARTED = "started"                    # application up, waiting for initialization / promotion
    INITIALIZING = "initializing"          # initialization or state handover in progress
    APP_INITIALIZED = "app_initialized"    # configured but inactive standby
    SHADOW_EXECUTION = "shadow_execution"  # consumes inputs, never delivers outputs
    ACTIVE = "active"

    @classmethod
    def parse(cls, text: str) -> "LifecycleMode":
        text = text.strip().lower()
        return cls(MODE_ALIASES.get(text, text))


MODE_ALIASES = {
    "uninitialized": "pod_started",
    "initialized": "app_initialized",
    "shadow": "shadow_execution",
}

# Levels a fallback instance may be provisioned at.
FALLBACK_LEVELS = (
    LifecycleMode.SCRATCH,
    LifecycleMode.POD_STARTED,
    LifecycleMode.APP_INITIALIZED,
    LifecycleMode.SHADOW_EXECUTION,
)

# Modes that consume CPU; every live container is in one of these.
LIVE_MODES = (
    LifecycleMode.POD_STARTED,
    LifecycleMode.STARTING,
    LifecycleMode.STARTED,
    LifecycleMode.INITIALIZING,
    LifecycleMode.APP_INITIALIZED,
    LifecycleMode.SHADOW_EXECUTION,
    LifecycleMode.ACTIVE,
)


# ============================================================
# DEFAULTS
# ============================================================

NAV_STARTUP_MS = 2000
NAV_INIT_MS = 1500
NAV_HANDOVER_MS = 300
NAV_MAX_SPEED = 0.5        # m/s
NAV_MAX_TURN_RATE = 1.5    # rad/s

MANIP_STARTUP_MS = 1500
MANIP_INIT_MS = 1000
MANIP_HANDOVER_MS = 200
MANIP_JOINT_SPEED = 1.0    # rad/s
MANIP_JOINTS = 5

LOC_STARTUP_MS = 1000
LOC_INIT_MS = 800
LOC_HANDOVER_MS = 100


def _cpu(active: int, uninitialized: int) -> dict:
    """Per-mode milliCPU table scaled between the standby and active cost."""
    return {
        LifecycleMode.POD_STARTED: uninitialized,
        LifecycleMode.STARTING: round(active * 0.8),
        LifecycleMode.STARTED: round(active * 0.8),
        LifecycleMode.INITIALIZING: round(active * 0.9),
        LifecycleMode.APP_INITIALIZED: round(active * 0.7),
        LifecycleMode.SHADOW_EXECUTION: active,
        LifecycleMode.ACTIVE: active,
    }


@dataclass(frozen=True)
class WorkloadProfile:
    kind: WorkloadKind
    startup_time: int
    init_time: int
    handover_time: int
    topics_out: tuple                  # ((topic, rate_hz), ...), first one is the primary output
    cpu_by_mode: Mapping = field(default_factory=dict, hash=False)
    dependencies: tuple = ()
    max_speed: float = NAV_MAX_SPEED
    max_turn_rate: float = NAV_MAX_TURN_RATE
    joint_speed_limit: float = MANIP_JOINT_SPEED

    @property
    def primary_topic(self) -> str:
        return self.topics_out[0][0]

    @property
    def topics(self) -> tuple:
        return tuple(topic for topic, _ in self.topics_out)

    def period_of(self, topic: str) -> int:
        """Publication period in ms of one of this profile's topics."""
        for name, rate in self.topics_out:
            if name == topic:
                return round(1000 / rate)
        raise KeyError(topic)

    @property
    def control_period(self) -> int:
        return min(round(1000 / rate) for _, rate in self.topics_out)

    def cpu(self, mode: LifecycleMode) -> int:
        return int(self.cpu_by_mode.get(mode, 0))

    def with_overrides(self, **changes) -> "WorkloadProfile":
        return replace(self, **changes)


DEFAULT_PROFILES = {
    WorkloadKind.NAVIGATION: WorkloadProfile(
        kind=WorkloadKind.NAVIGATION,
        startup_time=NAV_STARTUP_MS,
        init_time=NAV_INIT_MS,
        handover_time=NAV_HANDOVER_MS,
        topics_out=(("cmd_vel", 10.0), ("pose", 10.0)),
        cpu_by_mode=_cpu(active=1000, uninitialized=600),
    ),
    WorkloadKind.MANIPULATION: WorkloadProfile(
        kind=WorkloadKind.MANIPULATION,
        startup_time=MANIP_STARTUP_MS,
        init_time=MANIP_INIT_MS,
        handover_time=MANIP_HANDOVER_MS,
        topics_out=(("joint_states", 20.0),),
        cpu_by_mode=_cpu(active=800, uninitialized=480),
    ),
    WorkloadKind.LOCALIZATION: WorkloadProfile(
        kind=WorkloadKind.LOCALIZATION,
        startup_time=LOC_STARTUP_MS,
        init_time=LOC_INIT_MS,
        handover_time=LOC_HANDOVER_MS,
        topics_out=(("amcl_pose", 10.0),),
        cpu_by_mode=_cpu(active=250, uninitialized=150),
    ),
}


def default_profile(kind: WorkloadKind) -> WorkloadProfile:
    return DEFAULT_PROFILES[kind]
