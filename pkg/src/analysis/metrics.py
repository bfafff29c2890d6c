"""
Run metrics
===========

    sigma(c)   = (1/n) * sum_i gamma_{c, t_i}      mean CPU of one container
    sigma(CPU) = sum_c sigma(c)                     total over the cluster

Means are kept as exact fractions; rounding (half-even, 0.1 mCPU) happens only
when a value leaves the program.
"""

from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

MCPU_QUANTUM = Decimal("0.1")


def mean_cpu(samples) -> Fraction:
    """
    Mean usage of one container's sample series.

    Raises:
        ValueError: empty series (a container without samples has no mean).
    """
    samples = list(samples)
    if not samples:
        raise ValueError("mean of an empty sample series")
    return sum((Fraction(s.usage) for s in samples), Fraction(0)) / len(samples)


def round_mcpu(value) -> Decimal:
    """Half-even rounding to 0.1 mCPU, from an exact value."""
    if isinstance(value, Fraction):
        exact = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        exact = Decimal(str(value))
    return exact.quantize(MCPU_QUANTUM, rounding=ROUND_HALF_EVEN)


@dataclass
class MetricsBundle:
    run_id: str
    reports: list = field(default_factory=list)
    cpu: dict = field(default_factory=dict)        # container -> [CpuSample, ...]

    @property
    def derived(self) -> dict:
        """container -> sigma(c), for every container with at least one sample."""
        return {c: mean_cpu(s) for c, s in sorted(self.cpu.items()) if s}

    def container_mean(self, container: str) -> float:
        return float(self.derived[container])

    def samples(self) -> list:
        """Every sample, ordered by time then container."""
        rows = [s for series in self.cpu.values() for s in series]
        return sorted(rows, key=lambda s: (s.t, s.container))


def total_cpu(bundle: MetricsBundle) -> Fraction:
    return sum(bundle.derived.values(), Fraction(0))
