from typing import Optional

from ..models.outputs import ComparisonReport, ComparisonRow
from .templates import COMPARISON_TEMPLATE


def format_row(row: ComparisonRow) -> dict:
    # one table line; failed modes show dashes
    m = row.metrics
    if m is None:
        scores = {k: "-" for k in ("v_loss", "p_vm", "p_va", "p_pf", "p_qf")}
    else:
        scores = {
            "v_loss": f"{m.v_loss:.4e}",
            "p_vm": f"{m.p_vm:.2%}",
            "p_va": f"{m.p_va:.2%}",
            "p_pf": f"{m.p_pf:.2%}",
            "p_qf": f"{m.p_qf:.2%}",
        }
    return {
        "mode": row.mode.value,
        **scores,
        "n_epoch": row.n_epoch,
        "seconds": f"{row.seconds_per_epoch:.3f}",
        "stop": row.stop_reason.value if row.stop_reason else "-",
    }


def best_mode(report: ComparisonReport) -> Optional[str]:
    """mode with the lowest worst-case index; ties go to the earlier row"""
    scored = [r for r in report.rows if r.metrics is not None]
    if not scored:
        return None
    return min(scored, key=lambda r: max(r.metrics.p_vm, r.metrics.p_va, r.metrics.p_pf, r.metrics.p_qf)).mode.value


def generate_comparison_view(report: ComparisonReport) -> str:
    return COMPARISON_TEMPLATE.render(
        case=report.case or "unnamed case",
        protocol=report.protocol.value,
        seed=report.seed,
        rows=[format_row(r) for r in report.rows],
        failures=[{"mode": r.mode.value, "error": r.error} for r in report.rows if r.error],
        best=best_mode(report),
    )
