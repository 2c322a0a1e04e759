"""
Accuracy indexes of a trained model.

    P_vm  share of |dV| entries above vm_pu           (bus x sample)
    P_va  share of |dtheta| entries above va_rad      (bus x sample)
    P_pf  share of |dP_ij| entries above pf_mw        (branch x sample)
    P_qf  share of |dQ_ij| entries above qf_mw        (branch x sample)

Branch errors come from flows recomputed out of the predicted voltages,
converted to MW with the case's base_mva.
"""

import numpy as np

from ..grid import NetworkCase
from ..models.inputs import IndexThresholds
from ..models.outputs import MetricsReport
from ..nn.network import DnnModel, denormalize_output, forward
from ..powerflow import branch_flows
from ..training.losses import loss_standard


def _share(errors: np.ndarray, limit: float) -> float:
    if errors.size == 0:
        return 0.0
    return float(np.count_nonzero(errors > limit)) / errors.size


def index_proportions(y_pred, y_true, p_true, q_true, case: NetworkCase,
                      thresholds: IndexThresholds):
    """
    The four proportions from raw arrays: y are [V; theta] (2 n_bus x N),
    p_true / q_true are sending-end branch flows in p.u.

    Returns:
        (p_vm, p_va, p_pf, p_qf)
    """
    nb = case.n_bus
    v_hat, th_hat = y_pred[:nb], y_pred[nb:]
    flows = branch_flows(v_hat, th_hat, case.branches)
    base = case.base_mva
    return (
        _share(np.abs(v_hat - y_true[:nb]), thresholds.vm_pu),
        _share(np.abs(th_hat - y_true[nb:]), thresholds.va_rad),
        _share(np.abs(flows.p_from - p_true) * base, thresholds.pf_mw),
        _share(np.abs(flows.q_from - q_true) * base, thresholds.qf_mw),
    )


def evaluate_indexes(
    model: DnnModel,
    dataset,
    case: NetworkCase,
    thresholds: IndexThresholds = None,
    split: str = "test",
    n_epoch: int = 0,
) -> MetricsReport:
    """V_loss and the four accuracy proportions over a whole dataset split"""
    thresholds = thresholds or IndexThresholds()
    part = dataset.split(split)
    if part.n == 0:
        return MetricsReport(
            v_loss=0.0, p_vm=0.0, p_va=0.0, p_pf=0.0, p_qf=0.0,
            n_epoch=n_epoch, n_samples=0, split=split, thresholds=thresholds,
        )

    y_hat, _ = forward(model, part.x)
    v_loss = loss_standard(y_hat, part.y)

    p_vm, p_va, p_pf, p_qf = index_proportions(
        denormalize_output(model, y_hat),
        dataset.y_norm.invert(part.y),
        dataset.p_norm.invert(part.p_br),
        dataset.q_norm.invert(part.q_br),
        case,
        thresholds,
    )
    return MetricsReport(
        v_loss=v_loss,
        p_vm=p_vm,
        p_va=p_va,
        p_pf=p_pf,
        p_qf=p_qf,
        n_epoch=n_epoch,
        n_samples=part.n,
        split=split,
        thresholds=thresholds,
    )
