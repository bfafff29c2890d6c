"""Run metrics, exports and fleet-scaling analysis."""

from analysis.export import export_run, write_cpu_csv, write_reports, write_trace
from analysis.fleet import (
    FleetModel,
    MonteCarloEstimate,
    downtime_reduction,
    expected_failures,
    fallbacks_required,
    fleet_report,
    overflow_probability_analytic,
    overflow_probability_mc,
    overhead_vs_scratch,
    placement_count,
    select_strategy,
)
from analysis.metrics import MetricsBundle, mean_cpu, round_mcpu, total_cpu

__all__ = [
    "export_run", "write_cpu_csv", "write_reports", "write_trace",
    "FleetModel", "MonteCarloEstimate", "downtime_reduction", "expected_failures", "fallbacks_required",
    "fleet_report", "overflow_probability_analytic", "overflow_probability_mc", "overhead_vs_scratch",
    "placement_count", "select_strategy",
    "MetricsBundle", "mean_cpu", "round_mcpu", "total_cpu",
]
