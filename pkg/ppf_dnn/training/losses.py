"""
Training losses.

All inputs are normalized matrices (features x samples). The standard loss is
(1/2m) ||Y_pred - Y||^2. The branch-flow penalties compare flows computed
from the denormalized prediction, re-normalized with the dataset's branch
statistics, against the normalized flow labels:

    J_P = (1/2m) ||(P(V_hat, th_hat) - mean_P) / std_P - P_label||^2

and the same for Q.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from ..exceptions import ShapeMismatchError
from ..grid import NetworkCase
from ..models.enums import Guidance
from ..nn.network import DnnModel, forward
from ..powerflow import BranchArrays, branch_flows, incidence
from ..sampling.normalizer import Normalizer
from .modes import mode_spec


@dataclass(frozen=True)
class PenaltyContext:
    """case topology plus the statistics the penalty needs"""
    n_bus: int
    branches: BranchArrays
    cf: csr_matrix  # n_bus x n_branch
    ct: csr_matrix
    y_norm: Normalizer
    p_norm: Normalizer
    q_norm: Normalizer

    @classmethod
    def build(cls, case: NetworkCase, y_norm: Normalizer, p_norm: Normalizer,
              q_norm: Normalizer) -> "PenaltyContext":
        br = BranchArrays.of(case.branches)
        if y_norm.n_features != 2 * case.n_bus:
            raise ShapeMismatchError("output normalizer", (2 * case.n_bus,), (y_norm.n_features,))
        if p_norm.n_features != br.n or q_norm.n_features != br.n:
            raise ShapeMismatchError("branch normalizer", (br.n,), (p_norm.n_features,))
        cf, ct = incidence(case.n_bus, br)
        return cls(case.n_bus, br, cf, ct, y_norm, p_norm, q_norm)

    @classmethod
    def from_dataset(cls, case: NetworkCase, dataset) -> "PenaltyContext":
        return cls.build(case, dataset.y_norm, dataset.p_norm, dataset.q_norm)

    def split_raw(self, y_norm_values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raw = self.y_norm.invert(y_norm_values)
        return raw[:self.n_bus], raw[self.n_bus:]

    def flow_residuals(self, v, theta, p_label, q_label=None):
        """normalized flow errors (P_hat_n - P_n, Q_hat_n - Q_n); Q is None when not asked"""
        flows = branch_flows(v, theta, self.branches)
        dp = self.p_norm.apply(flows.p_from) - p_label
        dq = None if q_label is None else self.q_norm.apply(flows.q_from) - q_label
        return dp, dq


@dataclass(frozen=True)
class LossComponents:
    standard: float
    j_p: float = 0.0
    j_q: float = 0.0

    @property
    def total(self) -> float:
        return self.standard + self.j_p + self.j_q


def _half_mean_sq(diff: np.ndarray, m: int) -> float:
    return float(np.sum(diff * diff) / (2.0 * m))


def loss_standard(y_pred: np.ndarray, y_label: np.ndarray, m: Optional[int] = None) -> float:
    """(1/2m) times the squared Frobenius norm of the error"""
    y_pred = np.asarray(y_pred, dtype=float)
    y_label = np.asarray(y_label, dtype=float)
    if y_pred.shape != y_label.shape:
        raise ShapeMismatchError("loss inputs", y_label.shape, y_pred.shape)
    if m is None:
        m = y_pred.shape[1] if y_pred.ndim > 1 else 1
    return _half_mean_sq(y_pred - y_label, m)


def penalty_terms(v, theta, p_label, q_label, ctx: PenaltyContext, m: int) -> Tuple[float, float]:
    dp, dq = ctx.flow_residuals(v, theta, p_label, q_label)
    return _half_mean_sq(dp, m), (_half_mean_sq(dq, m) if dq is not None else 0.0)


def loss_modified(y_pred, y_label, p_label, q_label, ctx: PenaltyContext) -> Tuple[float, LossComponents]:
    """standard loss plus the active and reactive branch-flow penalties"""
    m = y_pred.shape[1]
    standard = loss_standard(y_pred, y_label, m)
    v, theta = ctx.split_raw(y_pred)
    j_p, j_q = penalty_terms(v, theta, p_label, q_label, ctx, m)
    parts = LossComponents(standard=standard, j_p=j_p, j_q=j_q)
    return parts.total, parts


def mode_objective(
    mode,
    model: DnnModel,
    x: np.ndarray,
    y_label: np.ndarray,
    p_label: np.ndarray,
    q_label: np.ndarray,
    ctx: PenaltyContext,
    alpha: float,
    beta: float,
    reference: np.ndarray,
) -> float:
    """
    The scalar a mode's backprop descends, with alpha and beta frozen.

    reference is the normalized network output at the point where alpha and
    beta were taken. The penalty on the V rows keeps the reference angles,
    the penalty on the theta rows keeps the reference magnitudes; at the
    reference point the parameter gradient of this function equals the
    mode's weighted gradient.

        full guidance:   Ls + alpha J(V, th_ref) + beta J(V_ref, th)
        angle:           Ls + beta (J_P + J_Q)(V_ref, th)
        angle, active:   Ls + beta J_P(V_ref, th)
        none:            Ls
    """
    spec = mode_spec(mode)
    y_pred, _ = forward(model, x)
    m = y_pred.shape[1]
    value = loss_standard(y_pred, y_label, m)
    if spec.guidance == Guidance.NONE:
        return value

    v, theta = ctx.split_raw(y_pred)
    v_ref, theta_ref = ctx.split_raw(reference)

    if spec.guidance == Guidance.FULL:
        value += alpha * sum(penalty_terms(v, theta_ref, p_label, q_label, ctx, m))
        value += beta * sum(penalty_terms(v_ref, theta, p_label, q_label, ctx, m))
    elif spec.guidance == Guidance.ANGLE:
        value += beta * sum(penalty_terms(v_ref, theta, p_label, q_label, ctx, m))
    else:
        value += beta * penalty_terms(v_ref, theta, p_label, None, ctx, m)[0]
    return value
