"""
Command-line entry point.

    python src/cli.py run nav_scratch --seed 1 --out out/
    python src/cli.py sweep nav_scratch --seeds 1-10 --jobs 4
    python src/cli.py fleet --robots 1000 --rate-per-hour 1 --interval-s 30 --window-s 6 --fallbacks 4

Exit codes:
    0  clean completion
    1  parse, usage or I/O error (diagnostics on standard error)
    2  scenario fault (the run aborted)
    3  mitigation escalation
"""

import json
import logging
import sys
from pathlib import Path

import click

from analysis.export import export_run
from analysis.fleet import FleetModel, fleet_report
from analysis.sweep import TABLE_HEADER, export_sweep, fold, row_means, run_sweep
from cluster.simulation import RunStatus, run
from errors import ExportError, ScenarioParseError
from mitigation.strategies import STRATEGY_ORDER, RecoveryStrategy
from scenario.corpus import load_scenario, resolve

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAULT = 2
EXIT_ESCALATED = 3

EXIT_CODES = {
    RunStatus.COMPLETED: EXIT_OK,
    RunStatus.SCENARIO_FAULT: EXIT_FAULT,
    RunStatus.ESCALATED: EXIT_ESCALATED,
}

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def _fail(message: str) -> None:
    click.echo(f"Error: {message}", err=True)
    raise SystemExit(EXIT_USAGE)


def _load(scenario: str):
    try:
        return load_scenario(resolve(scenario))
    except FileNotFoundError as e:
        _fail(f"scenario not found: {e}")
    except OSError as e:
        _fail(f"cannot read scenario '{scenario}': {e}")
    except ScenarioParseError as e:
        for diagnostic in e.diagnostics:
            click.echo(f"{scenario}:{diagnostic}", err=True)
        raise SystemExit(EXIT_USAGE) from e


def _strategy(_ctx, _param, value):
    if value is None:
        return None
    try:
        return RecoveryStrategy.parse(value)
    except ValueError:
        raise click.BadParameter(f"unknown strategy '{value}'") from None


def _strategies(_ctx, _param, value):
    if not value:
        return list(STRATEGY_ORDER)
    try:
        return [RecoveryStrategy.parse(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise click.BadParameter(str(e)) from None


def _seeds(_ctx, _param, value):
    """'1-10' or '1,2,5'."""
    try:
        if "-" in value:
            lo, hi = (int(v) for v in value.split("-", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a range like 1-10 or a list like 1,2,3, got '{value}'") from None


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on standard error.")
def cli(verbose):
    """Behavior-tree failure mitigation simulator."""
    _configure_logging(verbose)


@cli.command("run")
@click.argument("scenario")
@click.option("--seed", type=int, default=1, show_default=True, help="Seed of the run's random generator.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out", show_default=True,
              help="Output directory; the run writes into <out>/<run_id>/.")
@click.option("--strategy", callback=_strategy, default=None,
              help="Mitigate every injected workload with this strategy "
                   "(restart_scratch, fallback_pod_started, fallback_initialized, fallback_shadow_execution).")
def run_cmd(scenario, seed, out_dir, strategy):
    """Run SCENARIO (a .scenario file or a corpus name) and export trace, CPU samples and reports."""
    spec = _load(scenario)
    try:
        result = run(spec, seed, strategy)
    except ValueError as e:
        _fail(str(e))
    try:
        paths = export_run(result, Path(out_dir) / result.run_id)
    except ExportError as e:
        _fail(str(e))

    for report in result.reports:
        click.echo(
            f"{report.failure.workload}\t{report.strategy.value}\t"
            f"t_recovery={report.t_recovery} ms "
            f"(detection {report.t_detection}, cluster {report.t_cluster}, "
            f"startup {report.t_startup}, reinit {report.t_reinitialization})")
    click.echo(f"{result.status.value}: {len(result.reports)} report(s) -> {paths['reports'].parent}")
    for fault in result.faults:
        click.echo(f"fault: {fault}", err=True)
    raise SystemExit(EXIT_CODES[result.status])


@cli.command("sweep")
@click.argument("scenario")
@click.option("--strategies", callback=_strategies, default=None,
              help="Comma-separated strategies (default: all four, inapplicable ones skipped).")
@click.option("--seeds", callback=_seeds, default="1-10", show_default=True, help="Seed range or list.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out", show_default=True,
              help="Output directory for sweep.csv and sweep_detail.csv.")
def sweep_cmd(scenario, strategies, seeds, jobs, out_dir):
    """Compare recovery strategies on SCENARIO over several seeds."""
    spec = _load(scenario)
    summaries = run_sweep(spec, strategies, seeds, jobs)
    if not summaries:
        _fail(f"no applicable strategy for '{spec.name}'")
    rows = fold(summaries)
    try:
        export_sweep(rows, Path(out_dir) / f"{spec.name}-sweep")
    except OSError as e:
        _fail(f"cannot write sweep table: {e}")

    click.echo(",".join(TABLE_HEADER))
    for row in rows:
        means = row_means(row)
        click.echo(",".join(means[c] for c in TABLE_HEADER))

    statuses = {s.status for s in summaries}
    if RunStatus.SCENARIO_FAULT.value in statuses:
        raise SystemExit(EXIT_FAULT)
    if RunStatus.ESCALATED.value in statuses:
        raise SystemExit(EXIT_ESCALATED)


@cli.command("fleet")
@click.option("--robots", type=click.IntRange(min=1), required=True, help="Fleet size N.")
@click.option("--rate-per-hour", type=click.FloatRange(min=0), required=True, help="Failures per hour per robot.")
@click.option("--interval-s", type=click.FloatRange(min=0, min_open=True), required=True,
              help="Length of the observed interval in seconds.")
@click.option("--window-s", type=click.FloatRange(min=0, min_open=True), required=True,
              help="Downtime window of the chosen strategy in seconds.")
@click.option("--fallbacks", type=click.IntRange(min=0), default=0, show_default=True,
              help="Fallback workloads in the pool.")
@click.option("--failures", type=click.IntRange(min=0), default=None,
              help="Failures per interval (default: expected failures rounded down).")
@click.option("--trials", type=click.IntRange(min=10_000), default=100_000, show_default=True,
              help="Monte Carlo trials for the scan-window estimate.")
@click.option("--seed", type=int, default=0, show_default=True, help="Monte Carlo seed.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Monte Carlo threads.")
def fleet_cmd(robots, rate_per_hour, interval_s, window_s, fallbacks, failures, trials, seed, jobs):
    """Expected failures, placement count, overflow probability and CPU overhead of a fallback pool."""
    try:
        model = FleetModel(robots, rate_per_hour, interval_s, window_s, fallbacks)
        report = fleet_report(model, trials=trials, seed=seed, workers=jobs, failures=failures)
    except ValueError as e:
        _fail(str(e))
    # placement counts outgrow JSON number precision in most readers
    report["placement_count"] = str(report["placement_count"])
    click.echo(json.dumps(report, indent=2, sort_keys=True))


if __name__ == "__main__":
    cli()
