"""
Weight initialization.

Both schemes draw zero-mean Gaussian weights and zero biases; each layer has
its own random stream so a layer's draw does not depend on the others.

balanced: keeps forward signal and backward gradient magnitudes steady for a
ReLU net with a linear output. A weight layer mapping n_i to n_{i+1} gets

    first layer    Var = (2 n_i + n_{i+1}) / (n_i n_{i+1})
    middle layers  Var = (n_i + n_{i+1}) / (n_i n_{i+1})
    last layer     Var = (n_i + 2 n_{i+1}) / (n_i n_{i+1})

A single-layer net uses the middle rule.

he: Var = 2 / n_i (fan-in).
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..rng import make_rng

Params = Tuple[List[np.ndarray], List[np.ndarray]]


def _check(layer_sizes: Sequence[int]) -> None:
    if len(layer_sizes) < 2:
        raise ValueError(f"need at least two layer sizes, got {list(layer_sizes)}")
    if any(n < 1 for n in layer_sizes):
        raise ValueError(f"layer sizes must be positive, got {list(layer_sizes)}")


def balanced_std(layer_sizes: Sequence[int]) -> List[float]:
    _check(layer_sizes)
    k = len(layer_sizes) - 1
    out = []
    for i in range(k):
        n_in, n_out = layer_sizes[i], layer_sizes[i + 1]
        if k > 1 and i == 0:
            var = (2 * n_in + n_out) / (n_in * n_out)
        elif k > 1 and i == k - 1:
            var = (n_in + 2 * n_out) / (n_in * n_out)
        else:
            var = (n_in + n_out) / (n_in * n_out)
        out.append(float(np.sqrt(var)))
    return out


def he_std(layer_sizes: Sequence[int]) -> List[float]:
    _check(layer_sizes)
    return [float(np.sqrt(2.0 / n)) for n in layer_sizes[:-1]]


def _draw(layer_sizes: Sequence[int], stds: List[float], seed: int) -> Params:
    weights, biases = [], []
    for i, std in enumerate(stds):
        shape = (layer_sizes[i + 1], layer_sizes[i])
        weights.append(make_rng(seed, "init", i).normal(0.0, std, size=shape))
        biases.append(np.zeros(layer_sizes[i + 1]))
    return weights, biases


def init_balanced(layer_sizes: Sequence[int], seed: int) -> Params:
    """balanced initialization; returns (weights, biases)"""
    return _draw(layer_sizes, balanced_std(layer_sizes), seed)


def init_he(layer_sizes: Sequence[int], seed: int) -> Params:
    return _draw(layer_sizes, he_std(layer_sizes), seed)
