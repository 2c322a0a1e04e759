"""
Branch flows and their analytic sensitivities.

Every function here works on a single operating point (v, theta of shape
(n_bus,)) or on a batch (shape (n_bus, m), one column per sample); the
results carry the same trailing shape with n_branch rows.

The penalty terms of the training loss use the series-only branch model,
so the sensitivities are only defined for it. The flows themselves can
include taps and line charging (pi_model=True) for the Kirchhoff checks of
full-model cases.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix

from ..grid.case import Branch


@dataclass(frozen=True)
class BranchArrays:
    """column view of a branch list"""
    f: np.ndarray
    t: np.ndarray
    g: np.ndarray
    b: np.ndarray
    tap: np.ndarray
    b_charge: np.ndarray

    @property
    def n(self) -> int:
        return len(self.f)

    @classmethod
    def of(cls, branches: Union["BranchArrays", Sequence[Branch]]) -> "BranchArrays":
        if isinstance(branches, cls):
            return branches
        return cls(
            f=np.array([br.from_bus for br in branches], dtype=np.int64),
            t=np.array([br.to_bus for br in branches], dtype=np.int64),
            g=np.array([br.g_series for br in branches], dtype=float),
            b=np.array([br.b_series for br in branches], dtype=float),
            tap=np.array([br.tap for br in branches], dtype=float),
            b_charge=np.array([br.b_charge for br in branches], dtype=float),
        )


@dataclass(frozen=True)
class BranchFlows:
    p_from: np.ndarray
    q_from: np.ndarray
    p_to: np.ndarray
    q_to: np.ndarray


@dataclass(frozen=True)
class BranchSensitivities:
    """
    partials of the sending-end flows P_ij, Q_ij.
    fields a reduced evaluation skipped are None.
    """
    dp_dtheta_i: np.ndarray
    dp_dtheta_j: np.ndarray
    dq_dtheta_i: Optional[np.ndarray] = None
    dq_dtheta_j: Optional[np.ndarray] = None
    dp_dv_i: Optional[np.ndarray] = None
    dp_dv_j: Optional[np.ndarray] = None
    dq_dv_i: Optional[np.ndarray] = None
    dq_dv_j: Optional[np.ndarray] = None


def _col(a: np.ndarray, ndim: int) -> np.ndarray:
    # per-branch constants broadcast against (n_branch, m) batches
    return a if ndim == 1 else a.reshape(-1, *([1] * (ndim - 1)))


def _ends(v, theta, br: BranchArrays):
    v = np.asarray(v, dtype=float)
    theta = np.asarray(theta, dtype=float)
    vi, vj = v[br.f], v[br.t]
    dth = theta[br.f] - theta[br.t]
    return vi, vj, dth, v.ndim


def branch_flows(v, theta, branches, pi_model: bool = False) -> BranchFlows:
    """
    P_ij = g (Vi^2 - Vi Vj cos th_ij) - b Vi Vj sin th_ij
    Q_ij = -b (Vi^2 - Vi Vj cos th_ij) - g Vi Vj sin th_ij
    receiving end by swapping i and j.

    With pi_model the tap (from side) and half the line charging at each end
    are included; for tap = 1, b_charge = 0 both forms are the same.
    """
    br = BranchArrays.of(branches)
    vi, vj, dth, nd = _ends(v, theta, br)
    g, b = _col(br.g, nd), _col(br.b, nd)
    cos, sin = np.cos(dth), np.sin(dth)
    vv = vi * vj

    if not pi_model:
        p_from = g * (vi * vi - vv * cos) - b * vv * sin
        q_from = -b * (vi * vi - vv * cos) - g * vv * sin
        # sin/cos of th_ji = -th_ij
        p_to = g * (vj * vj - vv * cos) + b * vv * sin
        q_to = -b * (vj * vj - vv * cos) + g * vv * sin
        return BranchFlows(p_from, q_from, p_to, q_to)

    tap = _col(br.tap, nd)
    bsh = _col(0.5 * br.b_charge, nd)
    vt = vv / tap
    vi2 = vi * vi / (tap * tap)
    vj2 = vj * vj
    p_from = g * vi2 - vt * (g * cos + b * sin)
    q_from = -(b + bsh) * vi2 - vt * (g * sin - b * cos)
    p_to = g * vj2 - vt * (g * cos - b * sin)
    q_to = -(b + bsh) * vj2 + vt * (g * sin + b * cos)
    return BranchFlows(p_from, q_from, p_to, q_to)


def branch_sensitivities(v, theta, branches, parts: str = "all") -> BranchSensitivities:
    """
    Analytic partials of the sending-end series flows.

        dP/dth_i = g Vi Vj sin - b Vi Vj cos = -dP/dth_j
        dQ/dth_i = -b Vi Vj sin - g Vi Vj cos = -dQ/dth_j
        dP/dVi = 2 g Vi - Vj (g cos + b sin)      dP/dVj = -Vi (g cos + b sin)
        dQ/dVi = -2 b Vi + Vj (b cos - g sin)     dQ/dVj = Vi (b cos - g sin)

    parts: "all", "angle" (the four angle partials) or "angle_active"
    (dP/dth only). The reduced forms are what the simplified training modes
    evaluate.
    """
    if parts not in ("all", "angle", "angle_active"):
        raise ValueError(f"unknown sensitivity selection: {parts}")

    br = BranchArrays.of(branches)
    vi, vj, dth, nd = _ends(v, theta, br)
    g, b = _col(br.g, nd), _col(br.b, nd)
    cos, sin = np.cos(dth), np.sin(dth)
    vv = vi * vj

    dp_dti = vv * (g * sin - b * cos)
    if parts == "angle_active":
        return BranchSensitivities(dp_dtheta_i=dp_dti, dp_dtheta_j=-dp_dti)

    dq_dti = -vv * (b * sin + g * cos)
    if parts == "angle":
        return BranchSensitivities(
            dp_dtheta_i=dp_dti, dp_dtheta_j=-dp_dti,
            dq_dtheta_i=dq_dti, dq_dtheta_j=-dq_dti,
        )

    gcbs = g * cos + b * sin
    bcgs = b * cos - g * sin
    return BranchSensitivities(
        dp_dtheta_i=dp_dti,
        dp_dtheta_j=-dp_dti,
        dq_dtheta_i=dq_dti,
        dq_dtheta_j=-dq_dti,
        dp_dv_i=2.0 * g * vi - vj * gcbs,
        dp_dv_j=-vi * gcbs,
        dq_dv_i=-2.0 * b * vi + vj * bcgs,
        dq_dv_j=vi * bcgs,
    )


def incidence(n_bus: int, branches) -> Tuple[csr_matrix, csr_matrix]:
    """from- and to-side connection matrices, n_bus x n_branch"""
    br = BranchArrays.of(branches)
    cols = np.arange(br.n)
    ones = np.ones(br.n)
    cf = csr_matrix((ones, (br.f, cols)), shape=(n_bus, br.n))
    ct = csr_matrix((ones, (br.t, cols)), shape=(n_bus, br.n))
    return cf, ct


def bus_injections_from_flows(v, theta, case) -> Tuple[np.ndarray, np.ndarray]:
    """
    Net bus injections rebuilt from branch flows: the power leaving each bus
    over its branches plus what its shunt consumes. Independent of the
    admittance matrix, so it cross-checks the solver.
    """
    v = np.asarray(v, dtype=float)
    br = BranchArrays.of(case.branches)
    flows = branch_flows(v, theta, br, pi_model=not case.simplified)
    cf, ct = incidence(case.n_bus, br)

    gsh = np.array([bus.shunt_g for bus in case.buses])
    bsh = np.array([bus.shunt_b for bus in case.buses])
    if v.ndim > 1:
        gsh, bsh = gsh[:, None], bsh[:, None]
    v2 = v * v

    p = cf @ flows.p_from + ct @ flows.p_to + gsh * v2
    q = cf @ flows.q_from + ct @ flows.q_to - bsh * v2
    return np.asarray(p), np.asarray(q)
