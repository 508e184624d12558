"""
This module evaluates the AC power flow equations. Bus injections follow

    P = (G∘W∘cosΘ + B∘W∘sinΘ)1,   Q = (G∘W∘sinΘ − B∘W∘cosΘ)1

with W = vvᵀ and Θ = θ1ᵀ − 1θᵀ. The derivative and second-derivative helpers
work on the complex form S = diag(V)·conj(Y·V), which is the same quantity, and
return sparse matrices ordered (θ, v) the way the solvers stack their unknowns.
"""

from dataclasses import dataclass
import logging
from typing import Tuple

import numpy as np
from scipy import sparse

from wdro_opf.case_io import AdmittanceSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


@dataclass(frozen=True, eq=False)
class SystemState:
    """Bus voltage angles (rad) and magnitudes (p.u.) of the whole network"""

    theta: np.ndarray
    v: np.ndarray

    @property
    def complex_voltage(self) -> np.ndarray:
        """The phasors v·e^{jθ}"""

        return self.v * np.exp(1j * self.theta)

    @classmethod
    def flat(cls, n_bus: int) -> 'SystemState':
        """Every angle zero and every magnitude one"""

        return cls(theta=np.zeros(n_bus), v=np.ones(n_bus))


def injections(state: SystemState, adm: AdmittanceSet) -> Tuple[np.ndarray, np.ndarray]:
    """Net active and reactive power leaving every bus into the network.

    Args:
        state: Voltage angles and magnitudes.
        adm: The network's admittance structures.
    """

    theta_diff = state.theta[:, None] - state.theta[None, :]
    w = np.outer(state.v, state.v)
    cos_t = np.cos(theta_diff)
    sin_t = np.sin(theta_diff)
    p_inj = (adm.g * w * cos_t + adm.b * w * sin_t).sum(axis=1)
    q_inj = (adm.g * w * sin_t - adm.b * w * cos_t).sum(axis=1)
    return p_inj, q_inj


def power_derivatives(voltage: np.ndarray, ybus: sparse.spmatrix) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Partial derivatives of the complex injections with respect to the
    voltage angles and the voltage magnitudes.
    """

    ibus = ybus @ voltage
    diag_v = sparse.diags(voltage)
    diag_i = sparse.diags(ibus)
    diag_vnorm = sparse.diags(voltage / np.abs(voltage))
    ds_dva = 1j * diag_v @ (diag_i - ybus @ diag_v).conj()
    ds_dvm = diag_v @ (ybus @ diag_vnorm).conj() + diag_i.conj() @ diag_vnorm
    return sparse.csr_matrix(ds_dva), sparse.csr_matrix(ds_dvm)


def _complex_hessian(voltage: np.ndarray, ybus: sparse.spmatrix, lam: np.ndarray):
    ibus = ybus @ voltage
    diag_lam = sparse.diags(lam)
    diag_v = sparse.diags(voltage)
    a_mat = sparse.diags(lam * voltage)
    b_mat = ybus @ diag_v
    c_mat = a_mat @ b_mat.conj()
    d_mat = ybus.conj().T @ diag_v
    e_mat = diag_v.conj() @ (d_mat @ diag_lam - sparse.diags(d_mat @ lam))
    f_mat = c_mat - a_mat @ sparse.diags(ibus.conj())
    g_mat = sparse.diags(1.0 / np.abs(voltage))

    gaa = e_mat + f_mat
    gva = 1j * g_mat @ (e_mat - f_mat)
    gav = gva.T
    gvv = g_mat @ (c_mat + c_mat.T) @ g_mat
    return gaa, gav, gva, gvv


def power_hessian(
        voltage: np.ndarray, ybus: sparse.spmatrix, lam_p: np.ndarray, lam_q: np.ndarray,
) -> sparse.csr_matrix:
    """The 2n x 2n Hessian of lam_pᵀP + lam_qᵀQ with respect to (θ, v)"""

    paa, pav, pva, pvv = _complex_hessian(voltage, ybus, lam_p)
    qaa, qav, qva, qvv = _complex_hessian(voltage, ybus, lam_q)
    hess = (
        sparse.bmat([[paa, pav], [pva, pvv]]).real
        + sparse.bmat([[qaa, qav], [qva, qvv]]).imag
    )
    return sparse.csr_matrix(hess)


def branch_flows(state: SystemState, adm: AdmittanceSet) -> np.ndarray:
    """Exact active power entering every branch at its from end"""

    voltage = state.complex_voltage
    return np.real((adm.cf @ voltage) * np.conj(adm.yf @ voltage))


def branch_flow_derivatives(
        voltage: np.ndarray, adm: AdmittanceSet,
) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Partial derivatives of the from-end active branch flows with respect to
    the voltage angles and magnitudes.
    """

    i_from = adm.yf @ voltage
    diag_vf = sparse.diags(adm.cf @ voltage)
    diag_if = sparse.diags(i_from)
    diag_v = sparse.diags(voltage)
    diag_vnorm = sparse.diags(voltage / np.abs(voltage))
    dsf_dva = 1j * (diag_if.conj() @ adm.cf @ diag_v - diag_vf @ (adm.yf @ diag_v).conj())
    dsf_dvm = diag_vf @ (adm.yf @ diag_vnorm).conj() + diag_if.conj() @ adm.cf @ diag_vnorm
    return sparse.csr_matrix(dsf_dva.real), sparse.csr_matrix(dsf_dvm.real)
