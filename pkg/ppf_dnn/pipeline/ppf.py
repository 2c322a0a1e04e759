"""
Probabilistic power flow runs: draw samples, evaluate them with the network
or the Newton-Raphson solver, and summarize the outputs.

Only the evaluation step is timed; drawing samples and computing statistics
are left out on both paths.
"""

import time
from typing import List, Protocol, Tuple, Union

import numpy as np
from scipy.stats import iqr

from ..config import config
from ..grid import NetworkCase, build_ybus
from ..logging_config import get_logger
from ..models.enums import Engine
from ..models.inputs import UncertaintySpec
from ..models.outputs import (
    Histogram,
    PpfStatistics,
    PpfTiming,
    QuantityStatistics,
    StatisticsDelta,
)
from ..nn.network import DnnModel, predict
from ..powerflow import branch_flows
from ..sampling.dataset import check_failures, solve_samples
from ..sampling.distributions import draw_samples

logger = get_logger("pipeline")


class Evaluator(Protocol):
    engine: Engine
    workers: int

    def evaluate(self, case: NetworkCase, injections: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ...


class DnnEvaluator:
    """one batched pass through the trained network"""
    engine = Engine.DNN
    workers = 1

    def __init__(self, model: DnnModel):
        self.model = model

    def evaluate(self, case: NetworkCase, injections: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        y = predict(self.model, injections)
        return y[:case.n_bus], y[case.n_bus:]


class SolverEvaluator:
    """one Newton-Raphson solve per sample; failed samples are dropped"""
    engine = Engine.NR

    def __init__(self, workers: int = 1):
        self.workers = workers

    def evaluate(self, case: NetworkCase, injections: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        v, theta, ok = solve_samples(case, injections, ybus=build_ybus(case), workers=self.workers)
        n = injections.shape[1]
        check_failures(int(n - ok.sum()), n)
        return v[:, ok], theta[:, ok]


def _bin_count(values: np.ndarray, bins: Union[str, int]) -> int:
    """number of equal-width bins, capped at config.report.max_bins"""
    cap = config.report.max_bins
    if not isinstance(bins, str):
        return max(1, min(int(bins), cap))
    if bins not in ("fd", "auto"):
        # the other numpy rules grow with log or a root of the sample count
        return min(len(np.histogram_bin_edges(values, bins=bins)) - 1, cap)

    # fd explodes when the iqr is tiny next to the range, so count first
    span = float(np.ptp(values)) if values.size else 0.0
    if span == 0.0:
        return 1
    fd_width = 2.0 * float(iqr(values)) * values.size ** (-1.0 / 3.0)
    if bins == "auto":
        sturges_width = span / (np.log2(values.size) + 1.0)
        width = min(fd_width, sturges_width) if fd_width > 0 else sturges_width
    else:
        width = fd_width
    if width == 0.0:
        return 1
    return int(min(np.ceil(span / width), cap))


def histogram(values: np.ndarray, bins: Union[str, int] = None) -> Histogram:
    """
    Probability mass per bin. Bins default to the Freedman-Diaconis rule,
    capped at config.report.max_bins.
    """
    bins = config.report.histogram_bins if bins is None else bins
    values = np.asarray(values, dtype=float)
    counts, edges = np.histogram(values, bins=_bin_count(values, bins))
    mass = counts / counts.sum()
    return Histogram(edges=edges.tolist(), mass=mass.tolist())


def _quantity(name: str, labels: List[str], values: np.ndarray, bins) -> QuantityStatistics:
    return QuantityStatistics(
        quantity=name,
        labels=labels,
        mean=values.mean(axis=1).tolist(),
        std=values.std(axis=1).tolist(),
        histograms=[histogram(row, bins) for row in values],
    )


def summarize(engine: Engine, case: NetworkCase, v: np.ndarray, theta: np.ndarray,
              bins: Union[str, int] = None) -> PpfStatistics:
    """mean, population std and density of every output quantity"""
    flows = branch_flows(v, theta, case.branches)
    bus_labels = [str(b.label) for b in case.buses]
    br_labels = [
        f"{case.buses[br.from_bus].label}-{case.buses[br.to_bus].label}" for br in case.branches
    ]
    return PpfStatistics(
        engine=engine,
        n_samples=v.shape[1],
        quantities=[
            _quantity("v", bus_labels, v, bins),
            _quantity("theta", bus_labels, theta, bins),
            _quantity("p_flow", br_labels, flows.p_from, bins),
            _quantity("q_flow", br_labels, flows.q_from, bins),
        ],
    )


def run_ppf(
    evaluator: Evaluator,
    case: NetworkCase,
    spec: UncertaintySpec,
    n_samples: int,
    seed: int,
    bins: Union[str, int] = None,
) -> Tuple[PpfStatistics, PpfTiming]:
    """
    Monte-Carlo PPF with either engine.

    Returns:
        (statistics, timing of the evaluation step only)

    Raises:
        DatasetError: solver path, too many non-convergent samples
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")

    injections = draw_samples(spec, n_samples, seed)

    t0 = time.perf_counter()
    v, theta = evaluator.evaluate(case, injections)
    seconds = time.perf_counter() - t0

    stats = summarize(evaluator.engine, case, v, theta, bins)
    timing = PpfTiming(
        evaluation_seconds=seconds,
        per_sample_seconds=seconds / n_samples,
        workers=evaluator.workers,
    )
    logger.info(
        f"ppf ({evaluator.engine.value}): {n_samples} samples in {seconds:.4f}s "
        f"({timing.per_sample_seconds * 1e6:.1f} us/sample)"
    )
    return stats, timing


def compare_statistics(stats: PpfStatistics, benchmark: PpfStatistics) -> PpfStatistics:
    """copy of stats with per-quantity deltas (stats - benchmark) filled in"""
    deltas = []
    for q in stats.quantities:
        try:
            ref = benchmark.get(q.quantity)
        except KeyError:
            continue
        mean_delta = (np.asarray(q.mean) - np.asarray(ref.mean)).tolist()
        std_delta = (np.asarray(q.std) - np.asarray(ref.std)).tolist()
        deltas.append(StatisticsDelta(
            quantity=q.quantity,
            mean_delta=mean_delta,
            std_delta=std_delta,
            max_abs_mean_delta=float(np.max(np.abs(mean_delta))) if mean_delta else 0.0,
            max_abs_std_delta=float(np.max(np.abs(std_delta))) if std_delta else 0.0,
        ))
    return stats.model_copy(update={"deltas": deltas})
