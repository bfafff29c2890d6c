"""
Run exports
===========

Every run directory holds three files, all byte-stable for a given seed:

    trace.tsv      t<TAB>kind<TAB>{sorted-key JSON payload}
    cpu.csv        run_id,t_ms,container,cpu_mcpu   (0.1 mCPU, half-even)
    reports.json   run header, one record per RecoveryReport, per-container
                   means and sigma_cpu
"""

import csv
import json
import logging
from pathlib import Path

from analysis.metrics import MetricsBundle, round_mcpu, total_cpu
from errors import ExportError

logger = logging.getLogger(__name__)

CPU_HEADER = ("run_id", "t_ms", "container", "cpu_mcpu")
TRACE_FILE = "trace.tsv"
CPU_FILE = "cpu.csv"
REPORTS_FILE = "reports.json"


def write_cpu_csv(bundle: MetricsBundle, path) -> int:
    """Write the CPU sample table; returns the number of data rows."""
    rows = bundle.samples()
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CPU_HEADER)
        for s in rows:
            writer.writerow((bundle.run_id, s.t, s.container, str(round_mcpu(s.usage))))
    return len(rows)


def _check_identity(reports) -> None:
    for report in reports:
        if not report.identity_holds():
            raise ExportError(
                f"recovery time identity violated for {report.failure.workload}: "
                f"{' + '.join(str(c) for c in report.components)} != {report.t_recovery}")


def reports_document(result) -> dict:
    """The reports.json body for a finished run."""
    bundle = result.metrics
    _check_identity(bundle.reports)
    return {
        "run_id": result.run_id,
        "scenario": result.scenario,
        "seed": result.seed,
        "strategy": result.strategy.value if result.strategy else None,
        "status": result.status.value,
        "records": [r.to_record() for r in bundle.reports],
        "containers": {c: float(round_mcpu(m)) for c, m in bundle.derived.items()},
        "sigma_cpu": float(round_mcpu(total_cpu(bundle))),
    }


def write_reports(result, path) -> int:
    """
    Write reports.json; returns the number of recovery records.

    Raises:
        ExportError: a report breaks t_recovery == sum of its components.
    """
    doc = reports_document(result)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return len(doc["records"])


def write_trace(result, path) -> int:
    result.trace.write(path)
    return len(result.trace)


def export_run(result, out_dir) -> dict:
    """
    Write trace, CPU table and reports of one run into out_dir.

    Returns:
        dict: file kind -> written path

    Raises:
        ExportError: identity violation or any I/O failure.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {"trace": out / TRACE_FILE, "cpu": out / CPU_FILE, "reports": out / REPORTS_FILE}
        write_trace(result, paths["trace"])
        rows = write_cpu_csv(result.metrics, paths["cpu"])
        records = write_reports(result, paths["reports"])
    except OSError as e:
        raise ExportError(f"cannot write run exports to {out}: {e}") from e
    logger.info("Exported %s: %d CPU rows, %d recovery records -> %s", result.run_id, rows, records, out)
    return paths
