from dataclasses import dataclass
from typing import Tuple


@dataclass
class SolverSettings:
    """newton-raphson defaults - mirror the usual matpower options"""
    tol: float = 1e-8  # p.u., infinity norm of the mismatch
    max_iter: int = 20
    dense_limit: int = 200  # dense lu up to this many buses, sparse above
    simplified_model: bool = True  # taps -> 1, line charging dropped at import


@dataclass
class SamplingSettings:
    load_std_fraction: float = 0.10  # load std as a fraction of its mean
    max_failure_rate: float = 0.01  # abort dataset build above this
    default_split: Tuple[int, int, int] = (10000, 2000, 10000)


@dataclass
class AccuracyThresholds:
    """absolute error limits behind P_vm / P_va / P_pf / P_qf"""
    vm_pu: float = 1e-4
    va_rad: float = 0.01
    pf_mw: float = 5.0
    qf_mw: float = 5.0
    target_proportion: float = 0.05  # "all indexes no more than 5%"


@dataclass
class TrainingSettings:
    patience: int = 20  # epochs without validation improvement
    accuracy_check_every: int = 5
    max_epochs: int = 1000


@dataclass
class ReportSettings:
    histogram_bins: str = "fd"  # freedman-diaconis
    max_bins: int = 200


@dataclass
class Config:
    solver: SolverSettings = None
    sampling: SamplingSettings = None
    accuracy: AccuracyThresholds = None
    training: TrainingSettings = None
    report: ReportSettings = None

    def __post_init__(self):
        # defaults
        if self.solver is None:
            self.solver = SolverSettings()
        if self.sampling is None:
            self.sampling = SamplingSettings()
        if self.accuracy is None:
            self.accuracy = AccuracyThresholds()
        if self.training is None:
            self.training = TrainingSettings()
        if self.report is None:
            self.report = ReportSettings()


# global config instance
config = Config()
