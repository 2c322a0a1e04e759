from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from .enums import Engine, Mode, Protocol, StopReason
from .inputs import IndexThresholds


class DatasetManifest(BaseModel):
    """dataset.json, next to the binary arrays"""
    format_version: int = 1
    case_name: Optional[str] = None
    n_bus: int
    n_branch: int
    n_requested: int
    n_samples: int  # converged pool
    discarded: int
    seed: int
    split_sizes: Tuple[int, int, int]  # train, validation, test


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_loss: float
    J_P: float
    J_Q: float
    alpha: float
    beta: float
    seconds: float


class TrainHistory(BaseModel):
    mode: Mode
    records: List[EpochRecord] = []
    stop_reason: Optional[StopReason] = None
    best_epoch: int = 0  # 0 = the initialized model
    best_val_loss: Optional[float] = None

    @model_validator(mode="after")
    def check_epochs(self):
        epochs = [r.epoch for r in self.records]
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ValueError("epoch indices must increase")
        return self

    @property
    def n_epochs(self) -> int:
        return len(self.records)

    def seconds_per_epoch(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.seconds for r in self.records) / len(self.records)


class MetricsReport(BaseModel):
    v_loss: float
    p_vm: float = Field(ge=0, le=1)
    p_va: float = Field(ge=0, le=1)
    p_pf: float = Field(ge=0, le=1)
    p_qf: float = Field(ge=0, le=1)
    n_epoch: int = 0
    n_samples: int
    split: str = "test"
    thresholds: IndexThresholds

    def meets(self, target: float) -> bool:
        return max(self.p_vm, self.p_va, self.p_pf, self.p_qf) <= target


class Histogram(BaseModel):
    edges: List[float]
    mass: List[float]  # probability per bin, sums to 1


class QuantityStatistics(BaseModel):
    """mean / std / density of one output quantity at every bus or branch"""
    quantity: str  # v, theta, p_flow, q_flow
    labels: List[str]
    mean: List[float]
    std: List[float]
    histograms: List[Histogram]


class StatisticsDelta(BaseModel):
    quantity: str
    mean_delta: List[float]
    std_delta: List[float]
    max_abs_mean_delta: float
    max_abs_std_delta: float


class PpfStatistics(BaseModel):
    engine: Engine
    n_samples: int
    quantities: List[QuantityStatistics] = []
    deltas: List[StatisticsDelta] = []  # against a benchmark run, when compared

    def get(self, quantity: str) -> QuantityStatistics:
        for q in self.quantities:
            if q.quantity == quantity:
                return q
        raise KeyError(quantity)


class PpfTiming(BaseModel):
    """pure evaluation time; sampling and statistics are not counted"""
    evaluation_seconds: float
    per_sample_seconds: float
    workers: int = 1


class PpfReport(BaseModel):
    case: Optional[str] = None
    seed: int
    statistics: PpfStatistics
    timing: PpfTiming
    metrics: Optional[MetricsReport] = None


class ComparisonRow(BaseModel):
    mode: Mode
    metrics: Optional[MetricsReport] = None
    n_epoch: int = 0
    seconds_per_epoch: float = 0.0
    stop_reason: Optional[StopReason] = None
    error: Optional[str] = None


class ComparisonReport(BaseModel):
    case: Optional[str] = None
    protocol: Protocol
    seed: int
    rows: List[ComparisonRow] = []

    def row(self, mode: Mode) -> ComparisonRow:
        for r in self.rows:
            if r.mode == mode:
                return r
        raise KeyError(mode)


class BenchmarkReport(BaseModel):
    case: Optional[str] = None
    n_samples: int
    seed: int
    dnn_seconds: float
    nr_seconds: float
    nr_parallel_seconds: Optional[float] = None
    workers: int = 1
    speedup: float
    parallel_speedup: Optional[float] = None


# --- model file header ------------------------------------------------------

class ParameterSlot(BaseModel):
    name: str  # w0, b0, w1, ...
    shape: List[int]
    offset: int  # in float64 elements from the start of the block


class NormalizerStats(BaseModel):
    mean: List[float]
    std: List[float]


class ModelHeader(BaseModel):
    format_version: int = 1
    layer_sizes: List[int]
    hidden_activation: str = "relu"
    output_activation: str
    mode: Optional[Mode] = None
    init: Optional[str] = None
    seed: int = 0
    case_name: Optional[str] = None
    x_norm: NormalizerStats
    y_norm: NormalizerStats
    parameters: List[ParameterSlot]
