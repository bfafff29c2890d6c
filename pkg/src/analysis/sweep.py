"""
Strategy sweep
==============

Runs one scenario under several recovery strategies and seeds, then folds the
recovery reports into one comparison row per strategy (mean, min and max of
each recovery-time component and of sigma_cpu).

Runs are independent, so they may execute in worker processes; rows are
always merged in strategy order (slowest recovery first), then by seed.
"""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from analysis.metrics import round_mcpu, total_cpu
from cluster.simulation import RunStatus, run
from mitigation.strategies import STRATEGY_ORDER, RecoveryStrategy, mitigation_targets
from scenario.model import ScenarioSpec

logger = logging.getLogger(__name__)

COLUMNS = ("t_detection", "t_cluster", "t_startup", "t_reinit", "t_recovery", "sigma_cpu")
TABLE_HEADER = ("strategy",) + COLUMNS
TABLE_FILE = "sweep.csv"
DETAIL_FILE = "sweep_detail.csv"


@dataclass
class RunSummary:
    """What a sweep keeps of one run (small enough to send between processes)."""
    strategy: RecoveryStrategy
    seed: int
    run_id: str
    status: str
    records: list
    sigma_cpu: Fraction


@dataclass
class SweepRow:
    strategy: RecoveryStrategy
    runs: int = 0
    values: dict = field(default_factory=lambda: {c: [] for c in COLUMNS})

    @property
    def n(self) -> int:
        """Number of recovery reports folded into the row."""
        return len(self.values["t_recovery"])

    def mean(self, column: str) -> Fraction:
        vals = self.values[column]
        if not vals:
            raise ValueError(f"no {column} values for {self.strategy.value}")
        return sum((Fraction(v) for v in vals), Fraction(0)) / len(vals)

    def min(self, column: str):
        return min(self.values[column])

    def max(self, column: str):
        return max(self.values[column])

    def add(self, summary: RunSummary) -> None:
        self.runs += 1
        for record in summary.records:
            for column in COLUMNS[:-1]:
                self.values[column].append(record[column])
        self.values["sigma_cpu"].append(summary.sigma_cpu)


def applicable_strategies(spec: ScenarioSpec, strategies) -> list:
    """Strategies that apply to every injected workload; the rest are skipped with a warning."""
    kinds = [spec.workload(w).profile.kind for w in mitigation_targets(spec)]
    kept = []
    for strategy in strategies:
        blocked = [k for k in kinds if not strategy.applies_to(k)]
        if blocked:
            logger.warning("Skipping %s for %s: not applicable to %s workloads",
                           strategy.value, spec.name, ", ".join(sorted({k.value for k in blocked})))
            continue
        kept.append(strategy)
    return kept


def run_one(spec: ScenarioSpec, strategy: RecoveryStrategy, seed: int) -> RunSummary:
    result = run(spec, seed, strategy)
    if result.status is not RunStatus.COMPLETED:
        logger.warning("Run %s ended %s", result.run_id, result.status.value)
    return RunSummary(strategy, seed, result.run_id, result.status.value,
                      [r.to_record() for r in result.reports], total_cpu(result.metrics))


def _run_job(job) -> RunSummary:
    return run_one(*job)


def _order(summary: RunSummary):
    return STRATEGY_ORDER.index(summary.strategy), summary.seed


def run_sweep(spec: ScenarioSpec, strategies=STRATEGY_ORDER, seeds=range(1, 11), jobs: int = 1) -> list:
    """
    Run every (strategy, seed) pair.

    Args:
        spec: scenario to sweep
        strategies: candidates; inapplicable ones are dropped
        seeds: run seeds
        jobs: worker processes (1 runs in-process)

    Returns:
        list of RunSummary, ordered by strategy then seed
    """
    strategies = applicable_strategies(spec, strategies)
    seeds = list(seeds)
    work = [(spec, s, seed) for s in strategies for seed in seeds]
    logger.info("Sweeping %s: %d strategies x %d seeds", spec.name, len(strategies), len(seeds))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_run_job, work))
    else:
        summaries = [_run_job(job) for job in work]
    return sorted(summaries, key=_order)


def fold(summaries) -> list:
    """One SweepRow per strategy, in strategy order."""
    rows = {}
    for summary in sorted(summaries, key=_order):
        rows.setdefault(summary.strategy, SweepRow(summary.strategy)).add(summary)
    return [rows[s] for s in STRATEGY_ORDER if s in rows]


def _cell(value) -> str:
    # same 0.1 half-even quantum as the CPU exports
    return str(round_mcpu(value))


def row_means(row: SweepRow) -> dict:
    out = {"strategy": row.strategy.value}
    for column in COLUMNS:
        out[column] = _cell(row.mean(column)) if row.values[column] else ""
    return out


def write_table(rows, path) -> None:
    """strategy,t_detection,t_cluster,t_startup,t_reinit,t_recovery,sigma_cpu (means)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=TABLE_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row_means(row))


def write_detail(rows, path) -> None:
    """Mean, min and max of every column, one row per (strategy, column)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("strategy", "column", "n", "mean", "min", "max"))
        for row in rows:
            for column in COLUMNS:
                if not row.values[column]:
                    continue
                writer.writerow((row.strategy.value, column, len(row.values[column]),
                                 _cell(row.mean(column)), _cell(row.min(column)), _cell(row.max(column))))


def export_sweep(rows, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"table": out / TABLE_FILE, "detail": out / DETAIL_FILE}
    write_table(rows, paths["table"])
    write_detail(rows, paths["detail"])
    logger.info("Sweep table -> %s", paths["table"])
    return paths
