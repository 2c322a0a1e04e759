from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..exceptions import ShapeMismatchError
from ..models.inputs import TrainConfig
from ..nn.network import DnnModel


@dataclass
class RmspropState:
    """running mean of squared gradients, one array per parameter"""
    r_w: List[np.ndarray]
    r_b: List[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, model: DnnModel) -> "RmspropState":
        return cls(
            r_w=[np.zeros_like(w) for w in model.weights],
            r_b=[np.zeros_like(b) for b in model.biases],
        )


def rmsprop_update(r: np.ndarray, grad: np.ndarray, eta: float, rho: float,
                   epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    R <- rho R + (1 - rho) g*g, then delta = eta g / sqrt(R + eps).
    R is updated first and used in the same step.

    Returns:
        (new R, delta to subtract from the parameter)
    """
    r_new = rho * r + (1.0 - rho) * grad * grad
    return r_new, eta * grad / np.sqrt(r_new + epsilon)


def rmsprop_step(state: RmspropState, model: DnnModel, grads, config: TrainConfig) -> DnnModel:
    """apply one update in place; grads carries dws / dbs"""
    for i in range(model.n_layers):
        for params, rs, g in ((model.weights, state.r_w, grads.dws[i]), (model.biases, state.r_b, grads.dbs[i])):
            if g.shape != params[i].shape:
                raise ShapeMismatchError(f"gradient of layer {i}", params[i].shape, g.shape)
            rs[i], delta = rmsprop_update(rs[i], g, config.eta, config.rho, config.epsilon)
            params[i] -= delta
    state.t += 1
    return model
