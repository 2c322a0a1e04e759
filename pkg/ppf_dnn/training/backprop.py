"""
Hand-derived backpropagation for every training mode.

Output rows are [V (n_bus); theta (n_bus)]. The output-layer terms are kept
without the 1/m factor, which is applied once in the weight gradients:

    d1 = Y_hat - Y
    d2 = per output, summed over incident branches:
         (P_hat_n - P_n) / std_P * dP/d(output) * std_output
    d3 = the same with Q

Sensitivities are evaluated at the predicted operating point, so d2 and d3
are the exact gradients of the penalties. The combined output gradient is

    V rows      d1 + alpha (d2 + d3)
    theta rows  d1 + beta (d2 + d3)

with the rows and sensitivity sets each mode keeps (see modes.py).
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import NonFiniteGradientError, ShapeMismatchError
from ..models.enums import Guidance
from ..nn.network import RELU, DnnModel, ForwardTrace, relu_derivative
from ..powerflow import branch_sensitivities
from .losses import PenaltyContext
from .modes import mode_spec

_PARTS = {
    Guidance.FULL: "all",
    Guidance.ANGLE: "angle",
    Guidance.ANGLE_ACTIVE: "angle_active",
}


@dataclass
class GradientBundle:
    d1: np.ndarray
    d2: Optional[np.ndarray]
    d3: Optional[np.ndarray]
    dL: np.ndarray  # w.r.t. the output activations
    dws: List[np.ndarray]
    dbs: List[np.ndarray]
    alpha: float = 0.0
    beta: float = 0.0


def _spread(ctx: PenaltyContext, err: np.ndarray, d_i: np.ndarray, d_j: np.ndarray) -> np.ndarray:
    # per-branch terms onto the two end buses
    return ctx.cf @ (err * d_i) + ctx.ct @ (err * d_j)


def penalty_gradients(
    y_pred: np.ndarray,
    p_label: np.ndarray,
    q_label: np.ndarray,
    ctx: PenaltyContext,
    guidance: Guidance,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """d2 and d3 over the full output width; rows a mode skips stay zero, d3 is None without Q"""
    nb = ctx.n_bus
    m = y_pred.shape[1]
    v, theta = ctx.split_raw(y_pred)
    sens = branch_sensitivities(v, theta, ctx.branches, parts=_PARTS[guidance])
    use_q = guidance != Guidance.ANGLE_ACTIVE
    dp, dq = ctx.flow_residuals(v, theta, p_label, q_label if use_q else None)
    scale_y = ctx.y_norm.scale[:, None]

    ep = dp / ctx.p_norm.scale[:, None]
    d2 = np.zeros((2 * nb, m))
    d2[nb:] = _spread(ctx, ep, sens.dp_dtheta_i, sens.dp_dtheta_j)
    if guidance == Guidance.FULL:
        d2[:nb] = _spread(ctx, ep, sens.dp_dv_i, sens.dp_dv_j)
    d2 *= scale_y

    if not use_q:
        return d2, None

    eq = dq / ctx.q_norm.scale[:, None]
    d3 = np.zeros((2 * nb, m))
    d3[nb:] = _spread(ctx, eq, sens.dq_dtheta_i, sens.dq_dtheta_j)
    if guidance == Guidance.FULL:
        d3[:nb] = _spread(ctx, eq, sens.dq_dv_i, sens.dq_dv_j)
    d3 *= scale_y
    return d2, d3


def _ratio(d1_rows: np.ndarray, pen_rows: np.ndarray) -> float:
    den = float(np.max(np.abs(pen_rows))) if pen_rows.size else 0.0
    if den == 0.0:
        return 0.0
    return 0.5 * float(np.max(np.abs(d1_rows))) / den


def compute_alpha_beta(d1: np.ndarray, d2: np.ndarray, d3: Optional[np.ndarray], n_bus: int) -> Tuple[float, float]:
    """
    alpha = 0.5 max|d1_V| / max|d2_V + d3_V|, beta the same over the theta
    rows; a weight whose denominator is 0 is 0.
    """
    pen = d2 if d3 is None else d2 + d3
    return _ratio(d1[:n_bus], pen[:n_bus]), _ratio(d1[n_bus:], pen[n_bus:])


def backprop(
    mode,
    model: DnnModel,
    trace: ForwardTrace,
    y_label: np.ndarray,
    p_label: Optional[np.ndarray],
    q_label: Optional[np.ndarray],
    ctx: Optional[PenaltyContext],
    fixed_weights: Optional[Tuple[float, float]] = None,
) -> GradientBundle:
    """
    Gradients of one batch for the given mode.

    fixed_weights pins (alpha, beta) instead of taking them from the batch.
    Uses the weights the trace was computed with (the pre-update ones).

    Raises:
        ShapeMismatchError: labels do not match the network output
        NonFiniteGradientError: a layer produced inf/nan gradients
    """
    spec = mode_spec(mode)
    y_out = trace.output
    if y_label.shape != y_out.shape:
        raise ShapeMismatchError("output labels", y_out.shape, y_label.shape)
    m = y_out.shape[1]

    d1 = y_out - y_label
    d2 = d3 = None
    alpha = beta = 0.0
    if spec.guidance == Guidance.NONE:
        dL = d1
    else:
        if ctx is None:
            raise ValueError(f"mode {spec.mode.value} needs a penalty context")
        nb = ctx.n_bus
        d2, d3 = penalty_gradients(y_out, p_label, q_label, ctx, spec.guidance)
        if fixed_weights is not None:
            alpha, beta = fixed_weights
        else:
            alpha, beta = compute_alpha_beta(d1, d2, d3, nb)
        if spec.guidance != Guidance.FULL:
            alpha = 0.0  # no guidance on V rows
        pen = d2 if d3 is None else d2 + d3
        dL = d1.copy()
        dL[:nb] += alpha * pen[:nb]
        dL[nb:] += beta * pen[nb:]

    delta = dL * relu_derivative(trace.zs[-1]) if model.output_activation == RELU else dL

    k = model.n_layers
    dws: List[np.ndarray] = [None] * k
    dbs: List[np.ndarray] = [None] * k
    for i in reversed(range(k)):
        dws[i] = delta @ trace.ys[i].T / m
        dbs[i] = delta.sum(axis=1) / m
        if not (np.all(np.isfinite(dws[i])) and np.all(np.isfinite(dbs[i]))):
            raise NonFiniteGradientError(i)
        if i > 0:
            delta = (model.weights[i].T @ delta) * relu_derivative(trace.zs[i - 1])

    return GradientBundle(d1=d1, d2=d2, d3=d3, dL=dL, dws=dws, dbs=dbs, alpha=alpha, beta=beta)
