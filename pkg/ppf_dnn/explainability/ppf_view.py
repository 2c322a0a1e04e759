from ..models.outputs import BenchmarkReport, PpfReport
from .templates import BENCH_TEMPLATE, PPF_TEMPLATE


def _quantity_line(q, delta=None) -> dict:
    if not q.mean:
        line = {"name": q.quantity, "n": 0, "mean_range": "-", "max_std": "-"}
    else:
        line = {
            "name": q.quantity,
            "n": len(q.labels),
            "mean_range": f"{min(q.mean):.5g} .. {max(q.mean):.5g}",
            "max_std": f"{max(q.std):.4g}",
        }
    line["mean_delta"] = f"{delta.max_abs_mean_delta:.3e}" if delta else "-"
    line["std_delta"] = f"{delta.max_abs_std_delta:.3e}" if delta else "-"
    return line


def generate_ppf_view(report: PpfReport) -> str:
    stats = report.statistics
    deltas = {d.quantity: d for d in stats.deltas}
    metrics = None
    if report.metrics is not None:
        m = report.metrics
        metrics = {
            "split": m.split,
            "n_samples": m.n_samples,
            "p_vm": f"{m.p_vm:.2%}",
            "p_va": f"{m.p_va:.2%}",
            "p_pf": f"{m.p_pf:.2%}",
            "p_qf": f"{m.p_qf:.2%}",
        }
    return PPF_TEMPLATE.render(
        case=report.case or "unnamed case",
        engine=stats.engine.value,
        n_samples=stats.n_samples,
        seconds=f"{report.timing.evaluation_seconds:.4f}s",
        quantities=[_quantity_line(q, deltas.get(q.quantity)) for q in stats.quantities],
        deltas=bool(deltas),
        metrics=metrics,
    )


def generate_bench_view(report: BenchmarkReport) -> str:
    return BENCH_TEMPLATE.render(
        case=report.case or "unnamed case",
        n=report.n_samples,
        dnn=f"{report.dnn_seconds:.4f}",
        nr=f"{report.nr_seconds:.4f}",
        speedup=f"{report.speedup:.1f}x",
        nr_parallel=None if report.nr_parallel_seconds is None else f"{report.nr_parallel_seconds:.4f}",
        workers=report.workers,
        parallel_speedup=None if report.parallel_speedup is None else f"{report.parallel_speedup:.1f}x",
    )
