"""
Full Newton-Raphson AC power flow, polar form.

Unknowns are theta at PV and PQ buses and |V| at PQ buses; the mismatch
vector is [P at PV, P at PQ, Q at PQ]. The Jacobian blocks come from the
complex injection derivatives, the same construction matpower uses in
dSbus_dV. Reactive limits at PV buses are not enforced.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import bmat, csr_matrix, diags
from scipy.sparse.linalg import spsolve

from ..config import config
from ..exceptions import NonConvergenceError, SingularJacobianError
from ..grid import AdmittanceMatrix, NetworkCase, build_ybus
from ..io.writer import write_csv_table, write_json_report
from ..logging_config import get_logger

logger = get_logger("powerflow")


@dataclass(frozen=True)
class PowerFlowSolution:
    v: np.ndarray
    theta: np.ndarray
    converged: bool
    iterations: int
    max_mismatch: float

    def to_dict(self, case: NetworkCase = None) -> dict:
        labels = [b.label for b in case.buses] if case is not None else list(range(len(self.v)))
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "max_mismatch": self.max_mismatch,
            "buses": [
                {"bus": int(lab), "v": float(vm), "theta": float(va)}
                for lab, vm, va in zip(labels, self.v, self.theta)
            ],
        }

    def write_json(self, path: Path, case: NetworkCase = None) -> Path:
        return write_json_report(self.to_dict(case), path)

    def write_csv(self, path: Path, case: NetworkCase = None) -> Path:
        rows = [(r["bus"], r["v"], r["theta"]) for r in self.to_dict(case)["buses"]]
        return write_csv_table(path, ["bus", "v", "theta"], rows)


def power_injection_derivatives(ybus: AdmittanceMatrix, v, theta) -> Tuple[csr_matrix, csr_matrix]:
    """
    dS/d|V| and dS/dtheta of the complex bus injections S = V conj(Y V).

    Returns:
        (ds_dvm, ds_dva) as sparse complex n x n matrices
    """
    y = ybus.matrix
    vc = np.asarray(v) * np.exp(1j * np.asarray(theta))
    ibus = y @ vc
    diag_v = diags(vc)
    diag_i = diags(ibus)
    diag_vnorm = diags(vc / np.abs(vc))

    ds_dvm = diag_v @ (y @ diag_vnorm).conj() + diag_i.conj() @ diag_vnorm
    ds_dva = 1j * (diag_v @ (diag_i - y @ diag_v).conj())
    return csr_matrix(ds_dvm), csr_matrix(ds_dva)


def _mismatch(y, vc, sbus, pvpq, pq) -> np.ndarray:
    mis = vc * np.conj(y @ vc) - sbus
    return np.concatenate([mis[pvpq].real, mis[pq].imag])


def _inf_norm(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


def solve_power_flow(
    case: NetworkCase,
    p_inj,
    q_inj,
    ybus: AdmittanceMatrix = None,
    tol: float = None,
    max_iter: int = None,
    v0: Optional[np.ndarray] = None,
    theta0: Optional[np.ndarray] = None,
    dense_limit: int = None,
) -> PowerFlowSolution:
    """
    Solve the AC power flow for one set of net bus injections (p.u.).

    P is read at PV and PQ buses, Q at PQ buses only; the slack holds its
    setpoint and theta = 0, PV buses hold their setpoint. Flat start unless
    v0 / theta0 are given (the setpoints always win at slack and PV buses).

    Raises:
        NonConvergenceError: mismatch above tol after max_iter corrections
        SingularJacobianError: the linear solve broke down
    """
    tol = config.solver.tol if tol is None else tol
    max_iter = config.solver.max_iter if max_iter is None else max_iter
    dense_limit = config.solver.dense_limit if dense_limit is None else dense_limit
    if ybus is None:
        ybus = build_ybus(case)

    y = ybus.matrix
    n = case.n_bus
    ref = case.slack
    pv, pq = case.pv, case.pq
    pvpq = np.concatenate([pv, pq])
    npvpq = len(pvpq)

    setpoints = case.v_setpoints()
    vm = setpoints.copy() if v0 is None else np.array(v0, dtype=float)
    va = np.zeros(n) if theta0 is None else np.array(theta0, dtype=float)
    fixed = np.concatenate([[ref], pv]).astype(np.int64)
    vm[fixed] = setpoints[fixed]
    va[ref] = 0.0

    sbus = np.asarray(p_inj, dtype=float) + 1j * np.asarray(q_inj, dtype=float)
    vc = vm * np.exp(1j * va)

    f = _mismatch(y, vc, sbus, pvpq, pq)
    norm = _inf_norm(f)
    it = 0
    dense = n <= dense_limit

    while norm > tol and it < max_iter:
        it += 1
        ds_dvm, ds_dva = power_injection_derivatives(ybus, vm, va)

        j11 = ds_dva[pvpq][:, pvpq].real
        if len(pq):
            j12 = ds_dvm[pvpq][:, pq].real
            j21 = ds_dva[pq][:, pvpq].imag
            j22 = ds_dvm[pq][:, pq].imag
            jac = bmat([[j11, j12], [j21, j22]], format="csr")
        else:
            jac = csr_matrix(j11)

        if dense:
            try:
                dx = np.linalg.solve(jac.toarray(), -f)
            except np.linalg.LinAlgError as e:
                raise SingularJacobianError(it) from e
        else:
            dx = spsolve(jac.tocsc(), -f)
        if not np.all(np.isfinite(dx)):
            raise SingularJacobianError(it)

        va[pvpq] += dx[:npvpq]
        vm[pq] += dx[npvpq:]
        vc = vm * np.exp(1j * va)

        f = _mismatch(y, vc, sbus, pvpq, pq)
        norm = _inf_norm(f)
        logger.debug(f"nr iteration {it}: max mismatch {norm:.3e}")
        if not np.isfinite(norm):
            break

    solution = PowerFlowSolution(
        v=vm,
        theta=va,
        converged=bool(norm <= tol),
        iterations=it,
        max_mismatch=norm,
    )
    if not solution.converged:
        raise NonConvergenceError(it, norm, solution)

    logger.debug(f"nr converged in {it} iterations, max mismatch {norm:.3e}")
    return solution
