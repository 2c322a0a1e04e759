import math
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import config
from ..exceptions import DistributionError
from .enums import BusKind, LoadRole, Mode


# --- case file schema -------------------------------------------------------

class BusRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    kind: BusKind
    p_load_mw: float = 0.0
    q_load_mvar: float = 0.0
    v_setpoint: float = 1.0
    shunt_g: float = 0.0  # p.u.
    shunt_b: float = 0.0  # p.u.


class BranchRecord(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    from_bus: int = Field(alias="from")
    to_bus: int = Field(alias="to")
    r: float
    x: float
    b_charge: float = 0.0
    tap: float = 1.0


class GenRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bus: int
    p_mw: float = 0.0
    q_mvar: float = 0.0


class CaseDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    base_mva: float = 100.0
    buses: List[BusRecord]
    branches: List[BranchRecord] = []
    gens: List[GenRecord] = []


# --- uncertainty spec -------------------------------------------------------
# each distribution knows how to check itself and draw from a numpy generator

class Constant(BaseModel):
    kind: Literal["constant"] = "constant"
    value: float

    def check(self) -> None:
        if not math.isfinite(self.value):
            raise DistributionError(f"constant value must be finite, got {self.value}")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value)

    @property
    def mean(self) -> float:
        return self.value


class Normal(BaseModel):
    kind: Literal["normal"] = "normal"
    mean: float
    std: float

    def check(self) -> None:
        if not (math.isfinite(self.mean) and math.isfinite(self.std)):
            raise DistributionError("normal parameters must be finite")
        if self.std < 0:
            raise DistributionError(f"normal std must be >= 0, got {self.std}")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.std == 0:
            return np.full(n, self.mean)
        return rng.normal(self.mean, self.std, size=n)


class Uniform(BaseModel):
    kind: Literal["uniform"] = "uniform"
    lo: float
    hi: float

    def check(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DistributionError("uniform bounds must be finite")
        if self.hi < self.lo:
            raise DistributionError(f"uniform needs lo <= hi, got [{self.lo}, {self.hi}]")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=n)

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)


class Beta(BaseModel):
    """beta(a, b) stretched onto [0, scale] - photovoltaic output stand-in"""
    kind: Literal["beta"] = "beta"
    a: float
    b: float
    scale: float = 1.0

    def check(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise DistributionError(f"beta shape parameters must be > 0, got a={self.a}, b={self.b}")
        if not math.isfinite(self.scale):
            raise DistributionError("beta scale must be finite")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.scale * rng.beta(self.a, self.b, size=n)

    @property
    def mean(self) -> float:
        return self.scale * self.a / (self.a + self.b)


class Weibull(BaseModel):
    """weibull(shape) times scale - wind output stand-in"""
    kind: Literal["weibull"] = "weibull"
    shape: float
    scale: float

    def check(self) -> None:
        if not self.shape > 0:
            raise DistributionError(f"weibull shape must be > 0, got {self.shape}")
        if not (math.isfinite(self.scale) and self.scale >= 0):
            raise DistributionError(f"weibull scale must be finite and >= 0, got {self.scale}")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.scale * rng.weibull(self.shape, size=n)

    @property
    def mean(self) -> float:
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)


Distribution = Annotated[
    Union[Constant, Normal, Uniform, Beta, Weibull],
    Field(discriminator="kind"),
]


class BusUncertainty(BaseModel):
    """
    one stochastic component at a bus, in p.u.
    loads are drawn as demand and enter the injection with a minus sign,
    generation enters with a plus sign; components on the same bus add up
    """
    bus: int  # internal 0-based index
    role: LoadRole = LoadRole.LOAD
    p: Distribution = Constant(value=0.0)
    q: Distribution = Constant(value=0.0)


class UncertaintySpec(BaseModel):
    n_bus: int = Field(gt=0)
    entries: List[BusUncertainty] = []

    @model_validator(mode="after")
    def check_bus_indices(self):
        for e in self.entries:
            if not 0 <= e.bus < self.n_bus:
                raise ValueError(f"entry references bus {e.bus}, case has {self.n_bus} buses")
        return self

    @classmethod
    def from_case(cls, case, std_fraction: float = None) -> "UncertaintySpec":
        """
        normal load model: every demand gets std = std_fraction * mean,
        generators stay at their scheduled output. generator Q is only an input
        at PQ buses - at PV and slack buses it is a power flow result.
        """
        if std_fraction is None:
            std_fraction = config.sampling.load_std_fraction
        if std_fraction < 0:
            raise DistributionError(f"std fraction must be >= 0, got {std_fraction}")

        entries = []
        for bus in case.buses:
            if bus.p_load == 0 and bus.q_load == 0:
                continue
            entries.append(BusUncertainty(
                bus=bus.id,
                role=LoadRole.LOAD,
                p=Normal(mean=bus.p_load, std=abs(bus.p_load) * std_fraction),
                q=Normal(mean=bus.q_load, std=abs(bus.q_load) * std_fraction),
            ))

        for gen in case.generators:
            is_pq = case.buses[gen.bus].kind == BusKind.PQ
            entries.append(BusUncertainty(
                bus=gen.bus,
                role=LoadRole.GENERATION,
                p=Constant(value=gen.p_gen),
                q=Constant(value=gen.q_gen if is_pq else 0.0),
            ))

        return cls(n_bus=case.n_bus, entries=entries)


# --- training ---------------------------------------------------------------

class IndexThresholds(BaseModel):
    vm_pu: float = Field(default_factory=lambda: config.accuracy.vm_pu, gt=0)
    va_rad: float = Field(default_factory=lambda: config.accuracy.va_rad, gt=0)
    pf_mw: float = Field(default_factory=lambda: config.accuracy.pf_mw, gt=0)
    qf_mw: float = Field(default_factory=lambda: config.accuracy.qf_mw, gt=0)


class TrainConfig(BaseModel):
    mode: Mode = Mode.M4
    eta: float = 0.001
    rho: float = 0.99
    epsilon: float = 1e-8
    batch_size: int = 100
    max_epochs: int = Field(default_factory=lambda: config.training.max_epochs, ge=0)
    patience: int = Field(default_factory=lambda: config.training.patience, ge=1)
    seed: int = 0
    stop_on_accuracy: bool = False
    accuracy_check_every: int = Field(default_factory=lambda: config.training.accuracy_check_every, ge=1)
    target_proportion: float = Field(default_factory=lambda: config.accuracy.target_proportion, ge=0, le=1)
    thresholds: IndexThresholds = Field(default_factory=IndexThresholds)

    @field_validator("rho")
    @classmethod
    def check_rho(cls, v):
        if not 0 < v < 1:
            raise ValueError(f"rho must be in (0, 1), got {v}")
        return v

    @field_validator("eta")
    @classmethod
    def check_eta(cls, v):
        if not v > 0:
            raise ValueError(f"eta must be > 0, got {v}")
        return v

    @field_validator("batch_size")
    @classmethod
    def check_batch_size(cls, v):
        if v < 1:
            raise ValueError(f"batch_size must be >= 1, got {v}")
        return v

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, v):
        if v < 0:
            raise ValueError(f"epsilon must be >= 0, got {v}")
        return v
