# nn subpackage
from .init import balanced_std, he_std, init_balanced, init_he
from .network import DnnModel, ForwardTrace, denormalize_output, forward, predict, relu, relu_derivative
from .serialization import load_model, save_model

__all__ = [
    "DnnModel",
    "ForwardTrace",
    "balanced_std",
    "denormalize_output",
    "forward",
    "he_std",
    "init_balanced",
    "init_he",
    "load_model",
    "predict",
    "relu",
    "relu_derivative",
    "save_model",
]
