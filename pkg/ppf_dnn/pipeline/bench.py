"""
Speed comparison: the same samples evaluated by the network and by the
Newton-Raphson solver (single worker, and a worker pool when asked).
"""

from ..grid import NetworkCase
from ..logging_config import get_logger
from ..models.inputs import UncertaintySpec
from ..models.outputs import BenchmarkReport
from ..nn.network import DnnModel
from .ppf import DnnEvaluator, SolverEvaluator, run_ppf

logger = get_logger("pipeline")

_MIN_SECONDS = 1e-12


def bench(
    case: NetworkCase,
    model: DnnModel,
    spec: UncertaintySpec,
    n_samples: int,
    seed: int = 0,
    workers: int = 1,
) -> BenchmarkReport:
    """wall-clock of the evaluation step only, per engine"""
    _, dnn = run_ppf(DnnEvaluator(model), case, spec, n_samples, seed)
    _, nr = run_ppf(SolverEvaluator(workers=1), case, spec, n_samples, seed)

    nr_parallel = None
    if workers > 1:
        _, pooled = run_ppf(SolverEvaluator(workers=workers), case, spec, n_samples, seed)
        nr_parallel = pooled.evaluation_seconds

    dnn_s = max(dnn.evaluation_seconds, _MIN_SECONDS)
    report = BenchmarkReport(
        case=case.name,
        n_samples=n_samples,
        seed=seed,
        dnn_seconds=dnn.evaluation_seconds,
        nr_seconds=nr.evaluation_seconds,
        nr_parallel_seconds=nr_parallel,
        workers=workers,
        speedup=nr.evaluation_seconds / dnn_s,
        parallel_speedup=None if nr_parallel is None else nr_parallel / dnn_s,
    )
    logger.info(f"dnn {report.dnn_seconds:.4f}s vs nr {report.nr_seconds:.4f}s: {report.speedup:.1f}x")
    return report
