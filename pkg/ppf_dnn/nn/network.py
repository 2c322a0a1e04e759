"""
Dense feed-forward network: parameters, forward pass and inference.

Batches are features x samples. Hidden layers are ReLU; the output layer is
linear, or ReLU for the all-ReLU baseline.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ShapeMismatchError
from ..models.enums import Mode
from ..sampling.normalizer import Normalizer

LINEAR = "linear"
RELU = "relu"


def relu(x):
    return np.maximum(x, 0.0)


def relu_derivative(z):
    """indicator z > 0; the derivative at exactly 0 is taken as 0"""
    return (np.asarray(z) > 0).astype(float)


@dataclass
class DnnModel:
    layer_sizes: Tuple[int, ...]
    weights: List[np.ndarray]  # w[i]: n_{i+1} x n_i
    biases: List[np.ndarray]  # b[i]: n_{i+1}
    x_norm: Normalizer
    y_norm: Normalizer
    output_activation: str = LINEAR
    mode: Optional[Mode] = None
    init: Optional[str] = None
    seed: int = 0
    case_name: Optional[str] = None

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        self.check()

    @property
    def n_layers(self) -> int:
        """number of weight layers"""
        return len(self.weights)

    def check(self) -> None:
        sizes = self.layer_sizes
        if len(sizes) < 2:
            raise ValueError(f"need at least input and output widths, got {sizes}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeMismatchError("parameter count", (len(sizes) - 1,), (len(self.weights),))
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]):
                raise ShapeMismatchError(f"w{i}", (sizes[i + 1], sizes[i]), w.shape)
            if b.shape != (sizes[i + 1],):
                raise ShapeMismatchError(f"b{i}", (sizes[i + 1],), b.shape)
        if self.output_activation not in (LINEAR, RELU):
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) and np.all(np.isfinite(b))
                   for w, b in zip(self.weights, self.biases))

    def copy(self) -> "DnnModel":
        return replace(
            self,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class ForwardTrace:
    """z[i] = w[i] y[i] + b[i]; y[0] is the input, y[-1] the output"""
    zs: List[np.ndarray] = field(default_factory=list)
    ys: List[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.ys[-1]


def forward(model: DnnModel, x_in) -> Tuple[np.ndarray, ForwardTrace]:
    """
    Evaluate a normalized batch.

    Returns:
        (normalized outputs, trace of every pre-activation and activation)
    """
    x = np.asarray(x_in, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != model.layer_sizes[0]:
        raise ShapeMismatchError("network input", (model.layer_sizes[0], x.shape[-1]), x.shape)

    trace = ForwardTrace(ys=[x])
    y = x
    last = model.n_layers - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = w @ y + b[:, None]
        if i < last or model.output_activation == RELU:
            y = relu(z)
        else:
            y = z
        trace.zs.append(z)
        trace.ys.append(y)
    return y, trace


def predict(model: DnnModel, injections: Sequence) -> np.ndarray:
    """
    Raw [P; Q] injections in, raw [V; theta] out.

    Outputs that were constant over the training data (slack angle, PV
    magnitudes) are returned as that constant.
    """
    x = model.x_norm.apply(np.asarray(injections, dtype=float))
    y, _ = forward(model, x)
    if np.ndim(injections) == 1:
        y = y[:, 0]
    return denormalize_output(model, y)


def denormalize_output(model: DnnModel, y: np.ndarray) -> np.ndarray:
    """network output back to raw units, constant features pinned"""
    out = model.y_norm.invert(y)
    pinned = model.y_norm.degenerate
    if np.any(pinned):
        mean = model.y_norm.mean[pinned]
        out[pinned] = mean if out.ndim == 1 else mean[:, None]
    return out
