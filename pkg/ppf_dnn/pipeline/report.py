"""
PPF report files.

    <out>/report.json                      full report (statistics, timing, metrics)
    <out>/stats_<quantity>.csv             label, mean, std
    <out>/histograms/<quantity>_<label>.csv  left, right, mass

Everything in the directory is derived from report.json, so loading it back
and exporting again reproduces the same bytes.
"""

from pathlib import Path
from typing import List, Optional

from ..io.loader import load_json_model
from ..io.writer import write_csv_table, write_json_report
from ..logging_config import get_logger
from ..models.outputs import MetricsReport, PpfReport, PpfStatistics, PpfTiming

logger = get_logger("pipeline")

REPORT_FILE = "report.json"


def build_report(
    statistics: PpfStatistics,
    timing: Optional[PpfTiming] = None,
    metrics: Optional[MetricsReport] = None,
    case: Optional[str] = None,
    seed: int = 0,
) -> PpfReport:
    if timing is None:
        timing = PpfTiming(evaluation_seconds=0.0, per_sample_seconds=0.0)
    return PpfReport(case=case, seed=seed, statistics=statistics, timing=timing, metrics=metrics)


def export_report(report: PpfReport, out_dir: Path) -> List[Path]:
    """
    Write report.json and the csv tables derived from it.

    Returns:
        every path written, report.json first

    Raises:
        ReportWriteError: the directory is not writable
    """
    out_dir = Path(out_dir)
    written = [write_json_report(report, out_dir / REPORT_FILE)]

    for q in report.statistics.quantities:
        rows = [[label, m, s] for label, m, s in zip(q.labels, q.mean, q.std)]
        written.append(write_csv_table(out_dir / f"stats_{q.quantity}.csv", ["label", "mean", "std"], rows))

        for label, h in zip(q.labels, q.histograms):
            rows = [[left, right, mass] for left, right, mass in zip(h.edges[:-1], h.edges[1:], h.mass)]
            path = out_dir / "histograms" / f"{q.quantity}_{label}.csv"
            written.append(write_csv_table(path, ["left", "right", "mass"], rows))

    if report.statistics.deltas:
        rows = [
            [d.quantity, d.max_abs_mean_delta, d.max_abs_std_delta] for d in report.statistics.deltas
        ]
        written.append(write_csv_table(
            out_dir / "deltas.csv", ["quantity", "max_abs_mean_delta", "max_abs_std_delta"], rows
        ))

    logger.info(f"wrote {len(written)} report files to {out_dir}")
    return written


def load_report(path: Path) -> PpfReport:
    """report.json, or a directory holding one"""
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_FILE
    return load_json_model(path, PpfReport)
