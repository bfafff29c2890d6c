import dataclasses
import itertools
import json
import math
from decimal import Decimal
from fractions import Fraction

import pytest

from analysis import (
    FleetModel,
    MetricsBundle,
    downtime_reduction,
    expected_failures,
    export_run,
    fallbacks_required,
    fleet_report,
    mean_cpu,
    overflow_probability_analytic,
    overflow_probability_mc,
    overhead_vs_scratch,
    placement_count,
    round_mcpu,
    select_strategy,
    total_cpu,
)
from analysis.export import CPU_HEADER, reports_document
from analysis.sweep import COLUMNS, SweepRow, export_sweep, fold, row_means, run_sweep
from cluster import CpuSample
from cluster.simulation import run
from errors import ExportError
from mitigation import RecoveryStrategy


def samples(container, *usages):
    return [CpuSample(container, 1000 * i, u) for i, u in enumerate(usages)]


# ============================================================
# METRICS
# ============================================================

def test_mean_cpu_is_exact():
    assert mean_cpu(samples("nav", 1000, 600, 600)) == Fraction(2200, 3)


def test_mean_of_nothing_is_an_error():
    with pytest.raises(ValueError):
        mean_cpu([])


def test_rounding_is_half_even_at_a_tenth():
    assert round_mcpu(Fraction(1, 4)) == Decimal("0.2")
    assert round_mcpu(Fraction(3, 4)) == Decimal("0.8")
    assert round_mcpu(Fraction(2200, 3)) == Decimal("733.3")


def test_total_cpu_sums_container_means():
    bundle = MetricsBundle("r", cpu={"nav": samples("nav", 1000, 1000), "monitor": samples("monitor", 150, 180)})
    assert total_cpu(bundle) == 1165
    assert list(bundle.derived) == ["monitor", "nav"]


def test_negative_sample_is_rejected():
    with pytest.raises(ValueError):
        CpuSample("nav", 0, -1.0)


# ============================================================
# EXPORT
# ============================================================

def test_exports_are_byte_identical_across_runs(load, tmp_path):
    spec = load("nav_scratch")
    first = export_run(run(spec, seed=1), tmp_path / "a")
    second = export_run(run(spec, seed=1), tmp_path / "b")
    for kind in ("trace", "cpu", "reports"):
        assert first[kind].read_bytes() == second[kind].read_bytes()


def test_cpu_table_layout(load, tmp_path):
    paths = export_run(run(load("nav_healthy"), seed=1), tmp_path)
    lines = paths["cpu"].read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CPU_HEADER)
    assert len(lines) - 1 == 60 * 2
    assert lines[1] == "nav_healthy-1,0,monitor,150.0"


def test_healthy_run_exports_no_records(load, tmp_path):
    paths = export_run(run(load("nav_healthy"), seed=1), tmp_path)
    doc = json.loads(paths["reports"].read_text(encoding="utf-8"))
    assert doc["records"] == []
    assert doc["containers"] == {"monitor": 150.0, "nav": 1000.0}
    assert doc["sigma_cpu"] == 1150.0


def test_reports_document_carries_the_recovery(load):
    doc = reports_document(run(load("nav_scratch"), seed=1))
    assert doc["run_id"] == "nav_scratch-1"
    assert doc["status"] == "completed"
    assert [r["t_recovery"] for r in doc["records"]] == [6900]


def test_identity_violation_blocks_export(load):
    result = run(load("nav_scratch"), seed=1)
    report = result.metrics.reports[0]
    result.metrics.reports[0] = dataclasses.replace(report, t_recovery=report.t_recovery + 1)
    with pytest.raises(ExportError):
        reports_document(result)


def test_unwritable_directory_is_an_export_error(load, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ExportError):
        export_run(run(load("nav_healthy"), seed=1), blocker / "out")


# ============================================================
# FLEET
# ============================================================

def test_expected_failures_of_the_worked_example():
    assert expected_failures(1000, 1.0, 30) == pytest.approx(8.333, abs=1e-3)
    model = FleetModel(1000, 1.0, 30, 6, fallbacks=4)
    assert model.failures == 8


@pytest.mark.parametrize("n, x", [(n, x) for n in range(1, 7) for x in range(0, 5)])
def test_placement_count_matches_enumeration(n, x):
    brute = sum(1 for _ in itertools.combinations_with_replacement(range(n), x))
    assert placement_count(n, x) == brute


def test_placement_count_is_exact_for_large_fleets():
    assert placement_count(1000, 8) == math.comb(1007, 999)


def test_placement_count_rejects_empty_fleet():
    with pytest.raises(ValueError):
        placement_count(0, 3)


def test_analytic_overflow_of_the_worked_example():
    assert overflow_probability_analytic(8, 4, 6, 30) == pytest.approx(0.0104064, abs=1e-6)


def test_overflow_degenerate_cases():
    assert overflow_probability_analytic(8, 8, 6, 30) == 0.0
    assert overflow_probability_analytic(3, 5, 6, 30) == 0.0
    assert overflow_probability_analytic(8, 4, 30, 30) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        overflow_probability_analytic(8, 4, 31, 30)


def test_overflow_monotonicity():
    by_pool = [overflow_probability_analytic(8, f, 6, 30) for f in range(9)]
    assert by_pool == sorted(by_pool, reverse=True)
    by_window = [overflow_probability_analytic(8, 4, w, 30) for w in (1, 3, 6, 12, 24)]
    assert by_window == sorted(by_window)


def test_fixed_window_monte_carlo_agrees_with_the_binomial_tail():
    est = overflow_probability_mc(8, 4, 6, 30, trials=100_000, seed=0, model="fixed")
    assert abs(est.estimate - 0.0104064) <= 4 * est.stderr
    assert est.hits == round(est.estimate * est.trials)


@pytest.mark.slow
def test_scan_window_overflow_is_bounded():
    est = overflow_probability_mc(8, 4, 6, 30, trials=1_000_000, seed=0, model="scan")
    single_anchor = overflow_probability_analytic(8, 3, 6, 30)
    assert single_anchor - 3 * est.stderr <= est.estimate <= 4 * single_anchor


def test_monte_carlo_is_reproducible_and_worker_independent():
    a = overflow_probability_mc(8, 4, 6, 30, trials=20_000, seed=7)
    b = overflow_probability_mc(8, 4, 6, 30, trials=20_000, seed=7, workers=4)
    assert a == b


def test_monte_carlo_needs_enough_trials():
    with pytest.raises(ValueError):
        overflow_probability_mc(8, 4, 6, 30, trials=100)
    with pytest.raises(ValueError):
        overflow_probability_mc(8, 4, 6, 30, model="sliding")


def test_monte_carlo_with_pool_covering_every_failure():
    assert overflow_probability_mc(3, 3, 6, 30).estimate == 0.0


def test_cpu_overhead_of_the_worked_example():
    assert overhead_vs_scratch(1000, 4, 600) == pytest.approx(0.24)
    assert overhead_vs_scratch(1000, 4, 1000) == pytest.approx(0.4)
    assert overhead_vs_scratch(1000, 1000, 1000) == pytest.approx(100.0)
    assert overhead_vs_scratch(1000, 0, 1000) == 0.0


def test_fallbacks_required():
    assert fallbacks_required(8, 6, 30, 0.02) == 4
    assert fallbacks_required(8, 6, 30, 1.0) == 0
    assert fallbacks_required(0, 6, 30, 0.0) == 0


def test_downtime_reduction():
    assert downtime_reduction(6900, 700) == pytest.approx(9.857, abs=1e-3)
    with pytest.raises(ValueError):
        downtime_reduction(6900, 0)


def test_fleet_model_validation():
    with pytest.raises(ValueError):
        FleetModel(0, 1.0, 30, 6)
    with pytest.raises(ValueError):
        FleetModel(1000, 1.0, 30, 60)


def test_fleet_report_fields():
    report = fleet_report(FleetModel(1000, 1.0, 30, 6, fallbacks=4), trials=10_000, seed=1)
    assert report["failures"] == 8
    assert report["overflow_analytic"] == pytest.approx(0.0104064, abs=1e-6)
    assert report["overflow_reference"] == 0.012
    assert report["overhead_pct"]["shadow_per_robot"] == pytest.approx(100.0)
    assert report["overflow_scan_mc"]["trials"] == 10_000


# ============================================================
# SWEEP
# ============================================================

def row(strategy, recovery, sigma):
    r = SweepRow(strategy)
    r.values["t_recovery"] = [recovery]
    r.values["sigma_cpu"] = [sigma]
    return r


def test_select_strategy_picks_cheapest_within_downtime():
    rows = [
        row(RecoveryStrategy.RESTART_SCRATCH, 6900, 1150),
        row(RecoveryStrategy.FALLBACK_POD_STARTED, 4100, 1750),
        row(RecoveryStrategy.FALLBACK_SHADOW_EXECUTION, 700, 2150),
    ]
    assert select_strategy(rows, 5000).strategy is RecoveryStrategy.FALLBACK_POD_STARTED
    assert select_strategy(rows, 1000).strategy is RecoveryStrategy.FALLBACK_SHADOW_EXECUTION
    assert select_strategy(rows, 1000, max_cpu=2000) is None
    assert select_strategy(rows, 500) is None


def test_navigation_sweep_orders_strategies_by_recovery_time(load, tmp_path):
    rows = fold(run_sweep(load("nav_scratch"), seeds=[1, 2]))
    assert [r.strategy for r in rows] == list(RecoveryStrategy)
    means = [r.mean("t_recovery") for r in rows]
    assert means == [6900, 4100, 2900, 700]
    assert all(r.n == 2 for r in rows)

    paths = export_sweep(rows, tmp_path)
    lines = paths["table"].read_text(encoding="utf-8").splitlines()
    assert lines[0] == "strategy," + ",".join(COLUMNS)
    assert len(lines) == 5


def test_manipulation_sweep_skips_inapplicable_level(load):
    rows = fold(run_sweep(load("manip_scratch"), seeds=[1]))
    assert RecoveryStrategy.FALLBACK_INITIALIZED not in [r.strategy for r in rows]
    assert len(rows) == 3


def test_single_run_sweep_matches_the_run(load):
    spec = load("nav_scratch")
    strategy = RecoveryStrategy.FALLBACK_SHADOW_EXECUTION
    (summary,) = run_sweep(spec, [strategy], [1])
    result = run(spec, 1, strategy)
    assert summary.records == [r.to_record() for r in result.reports]
    assert row_means(fold([summary])[0])["t_recovery"] == "700.0"
