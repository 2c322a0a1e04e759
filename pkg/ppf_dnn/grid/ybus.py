"""Builds the bus admittance matrix.

Same construction as the matpower/pypower makeYbus: per-branch 2x2 pi-model
blocks scattered through from/to connection matrices, plus the bus shunts.
The tap sits on the from side.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .case import NetworkCase


@dataclass(frozen=True)
class AdmittanceMatrix:
    n: int
    matrix: csr_matrix  # complex, n x n

    @property
    def g(self) -> csr_matrix:
        return self.matrix.real

    @property
    def b(self) -> csr_matrix:
        return self.matrix.imag

    def entry(self, i: int, j: int):
        y = self.matrix[i, j]
        return float(y.real), float(y.imag)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_ybus(case: NetworkCase, simplified: bool = None) -> AdmittanceMatrix:
    """
    Y_ii = sum of incident (y_s + j b/2) / tap^2 (from side) or y_s + j b/2 (to side) + shunt
    Y_ij = -y_s / tap

    simplified=None follows the case; True forces taps to 1 and drops charging
    even on a case parsed with the full pi model.
    """
    if simplified is None:
        simplified = case.simplified

    nb = case.n_bus
    nl = case.n_branch

    ysh = np.array([b.shunt_g + 1j * b.shunt_b for b in case.buses])
    ybus = csr_matrix((ysh, (range(nb), range(nb))), shape=(nb, nb), dtype=complex)
    if nl == 0:
        return AdmittanceMatrix(n=nb, matrix=ybus)

    f = np.array([br.from_bus for br in case.branches], dtype=np.int64)
    t = np.array([br.to_bus for br in case.branches], dtype=np.int64)
    ys = np.array([br.g_series + 1j * br.b_series for br in case.branches])
    if simplified:
        tap = np.ones(nl)
        bc = np.zeros(nl)
    else:
        tap = np.array([br.tap for br in case.branches])
        bc = np.array([br.b_charge for br in case.branches])

    ytt = ys + 0.5j * bc
    yff = ytt / (tap * tap)
    yft = -ys / tap
    ytf = yft

    rows = np.concatenate([f, f, t, t])
    cols = np.concatenate([f, t, f, t])
    vals = np.concatenate([yff, yft, ytf, ytt])
    ybus = ybus + csr_matrix((vals, (rows, cols)), shape=(nb, nb), dtype=complex)

    ybus.sum_duplicates()
    ybus.sort_indices()
    return AdmittanceMatrix(n=nb, matrix=ybus)
