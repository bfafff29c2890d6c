"""
Fleet scaling
=============

How many fallback workloads does a fleet of N robots need, and what do they
cost? Failures are i.i.d. and uniform over an interval; a failure occupies a
fallback for the strategy's downtime (the window).

    expected failures     X = N * rate * interval / 3600
    placements            C(N + X - 1, N - 1)   (multisets of X failures over N steps)
    fixed-window overflow P(Binomial(X, window / interval) >= F + 1)
    scan-window overflow  Monte Carlo: does ANY window of that length hold
                          more than F failures?

The scan model is the pessimistic one: a fixed window is one of the windows
it scans, so its overflow probability is always at least the fixed-window one.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binom

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
DEFAULT_PARTITIONS = 8
CHUNK_TRIALS = 100_000
REFERENCE_OVERFLOW = 0.012  # reported figure for the 1000-robot worked example
UNINITIALIZED_CPU_SHARE = 0.6


@dataclass(frozen=True)
class FleetModel:
    fleet_size: int
    failure_rate: float        # failures per hour per robot
    interval_s: float
    window_s: float            # downtime t_S of the chosen strategy
    fallbacks: int = 0

    def __post_init__(self):
        if self.fleet_size < 1:
            raise ValueError(f"fleet_size must be >= 1, got {self.fleet_size}")
        if self.failure_rate < 0:
            raise ValueError(f"failure_rate must be >= 0, got {self.failure_rate}")
        if self.interval_s <= 0 or self.window_s <= 0:
            raise ValueError("interval and window must be > 0 s")
        if self.window_s > self.interval_s:
            raise ValueError(f"window {self.window_s} s is longer than the interval {self.interval_s} s")
        if self.fallbacks < 0:
            raise ValueError(f"fallbacks must be >= 0, got {self.fallbacks}")

    @property
    def expected_failures(self) -> float:
        return expected_failures(self.fleet_size, self.failure_rate, self.interval_s)

    @property
    def failures(self) -> int:
        """Whole failures per interval used by the probability models (rounded down)."""
        return math.floor(self.expected_failures + 1e-9)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    trials: int
    hits: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "trials": self.trials, "hits": self.hits}


def expected_failures(fleet_size: int, rate_per_hour: float, interval_s: float) -> float:
    return fleet_size * rate_per_hour * interval_s / 3600.0


def placement_count(n: int, x: int) -> int:
    """Number of ways X indistinguishable failures fall on N time steps (exact)."""
    if n < 1 or x < 0:
        raise ValueError(f"placement_count needs N >= 1 and X >= 0, got N={n}, X={x}")
    return math.comb(n + x - 1, n - 1)


def _check_window(window: float, interval: float) -> None:
    if interval <= 0 or window < 0 or window > interval:
        raise ValueError(f"window must lie in [0, interval], got window={window}, interval={interval}")


def overflow_probability_analytic(x: int, f: int, window: float, interval: float) -> float:
    """Probability that a fixed window receives more than F of X uniform failures."""
    _check_window(window, interval)
    if x < 0 or f < 0:
        raise ValueError("X and F must be >= 0")
    if f >= x:
        return 0.0
    return float(binom.sf(f, x, window / interval))


def binom_se(p: float, n: int) -> float:
    return float(np.sqrt(p * (1 - p) / n))


def _overflow_hits(x: int, f: int, window: float, interval: float, trials: int, seed_seq, scan: bool) -> int:
    rng = np.random.default_rng(seed_seq)
    hits = 0
    remaining = trials
    while remaining > 0:
        n = min(remaining, CHUNK_TRIALS)
        times = rng.uniform(0.0, interval, size=(n, x))
        if scan:
            times.sort(axis=1)
            # F+1 failures within one window <=> some gap spanning F+1 sorted times fits
            spans = times[:, f:] - times[:, :x - f]
            hits += int(np.count_nonzero((spans <= window).any(axis=1)))
        else:
            hits += int(np.count_nonzero((times < window).sum(axis=1) > f))
        remaining -= n
    return hits


def overflow_probability_mc(x: int, f: int, window: float, interval: float, trials: int = 100_000,
                            seed: int = 0, model: str = "scan", partitions: int = DEFAULT_PARTITIONS,
                            workers: int = 1) -> MonteCarloEstimate:
    """
    Monte Carlo overflow probability.

    Args:
        model: "scan" (any window anchored at a failure) or "fixed" (one
            window, the Monte Carlo twin of the analytic model)
        partitions: trials are split into this many seeded substreams, so
            the estimate does not depend on `workers`
        workers: threads evaluating the partitions

    Raises:
        ValueError: fewer than MIN_TRIALS trials, bad window or model.
    """
    _check_window(window, interval)
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if model not in ("scan", "fixed"):
        raise ValueError(f"unknown overflow model '{model}'")
    if f >= x:
        return MonteCarloEstimate(0.0, 0.0, trials, 0)

    partitions = max(1, min(partitions, trials))
    sizes = [trials // partitions + (1 if i < trials % partitions else 0) for i in range(partitions)]
    streams = np.random.SeedSequence(seed).spawn(partitions)
    scan = model == "scan"

    def job(i):
        return _overflow_hits(x, f, window, interval, sizes[i], streams[i], scan)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(job, range(partitions)))
    else:
        hits = sum(job(i) for i in range(partitions))

    p = hits / trials
    logger.debug("overflow %s model: %d/%d hits", model, hits, trials)
    return MonteCarloEstimate(p, binom_se(p, trials), trials, hits)


def overhead_vs_scratch(fleet_size: int, fallbacks: int, fallback_cpu: float, main_cpu: float = 1000.0) -> float:
    """Extra CPU of the fallback pool relative to a fleet restarting from scratch, in percent."""
    if fleet_size < 1 or main_cpu <= 0:
        raise ValueError("fleet_size and main_cpu must be positive")
    return float(Fraction(fallbacks) * Fraction(fallback_cpu) * 100 / (Fraction(fleet_size) * Fraction(main_cpu)))


def fallbacks_required(x: int, window: float, interval: float, target: float) -> int:
    """Smallest pool size whose fixed-window overflow probability is <= target."""
    if not 0 <= target <= 1:
        raise ValueError(f"target probability must be in [0, 1], got {target}")
    for f in range(x + 1):
        if overflow_probability_analytic(x, f, window, interval) <= target:
            return f
    return x


def downtime_reduction(t_scratch: float, t_strategy: float) -> float:
    """How many times shorter the downtime is compared to restart from scratch."""
    if t_strategy <= 0:
        raise ValueError("strategy downtime must be > 0")
    return t_scratch / t_strategy


def select_strategy(rows, max_downtime_ms: float, max_cpu: float = None):
    """
    Cheapest strategy (lowest sigma_cpu) among sweep rows whose mean recovery
    time stays within max_downtime_ms (and whose sigma_cpu stays within
    max_cpu, if given). None when nothing qualifies.
    """
    eligible = [r for r in rows if r.n and float(r.mean("t_recovery")) <= max_downtime_ms]
    if max_cpu is not None:
        eligible = [r for r in eligible if float(r.mean("sigma_cpu")) <= max_cpu]
    if not eligible:
        return None
    return min(eligible, key=lambda r: (float(r.mean("sigma_cpu")), float(r.mean("t_recovery"))))


def fleet_report(model: FleetModel, trials: int = 100_000, seed: int = 0, workers: int = 1,
                 failures: int = None) -> dict:
    """Every fleet quantity for one model, ready for JSON."""
    x = model.failures if failures is None else failures
    analytic = overflow_probability_analytic(x, model.fallbacks, model.window_s, model.interval_s)
    mc = overflow_probability_mc(x, model.fallbacks, model.window_s, model.interval_s,
                                 trials=trials, seed=seed, workers=workers)
    return {
        "robots": model.fleet_size,
        "rate_per_hour": model.failure_rate,
        "interval_s": model.interval_s,
        "window_s": model.window_s,
        "fallbacks": model.fallbacks,
        "expected_failures": model.expected_failures,
        "failures": x,
        "placement_count": placement_count(model.fleet_size, x),
        "overflow_analytic": analytic,
        "overflow_scan_mc": mc.to_dict(),
        "overflow_reference": REFERENCE_OVERFLOW,
        "overhead_pct": {
            "uninitialized_fallbacks": overhead_vs_scratch(
                model.fleet_size, model.fallbacks, UNINITIALIZED_CPU_SHARE * 1000.0),
            "full_cost_fallbacks": overhead_vs_scratch(model.fleet_size, model.fallbacks, 1000.0),
            "shadow_per_robot": overhead_vs_scratch(model.fleet_size, model.fleet_size, 1000.0),
        },
        "seed": seed,
    }
