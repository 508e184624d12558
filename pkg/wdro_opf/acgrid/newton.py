"""
This module contains the Newton-Raphson power flow. The reference bus fixes the
angle, the reference and PV buses fix their voltage magnitude, and the solver
finds the remaining angles and the PQ-bus magnitudes that balance the specified
injections.
"""

from dataclasses import dataclass
import logging
from typing import List, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from wdro_opf.acgrid import PowerFlowDivergence, SingularJacobianError
from wdro_opf.acgrid.power import SystemState, power_derivatives
from wdro_opf.case_io import AdmittanceSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

TOL_PF = 1e-8
MAX_NEWTON_ITER = 30


@dataclass(frozen=True, eq=False)
class DispatchContext:
    """What the power flow has to satisfy.

    Attributes:
        p: Specified net active injection of every bus (generation minus load).
        q: Specified net reactive injection of every bus, used at PQ buses.
        v_set: Voltage magnitudes, used at the reference and PV buses.
        ref: Position of the reference bus.
        pv: Positions of the PV buses.
        pq: Positions of the PQ buses.
    """

    p: np.ndarray
    q: np.ndarray
    v_set: np.ndarray
    ref: int
    pv: Sequence[int]
    pq: Sequence[int]


# pylint: disable=too-many-locals
def solve_newton(
        ctx: DispatchContext,
        adm: AdmittanceSet,
        init: SystemState,
        tol: float = TOL_PF,
        max_iter: int = MAX_NEWTON_ITER,
        history: List[float] = None,
) -> SystemState:
    """Solve the AC power flow with Newton-Raphson.

    Args:
        ctx: Specified injections, voltage setpoints and the bus partition.
        adm: Admittance structures of the network.
        init: Starting point. Its angles are shifted so the reference is at zero
            and its magnitudes at the reference and PV buses replaced by the
            setpoints.
        tol: Largest allowed mismatch (p.u.) of any equation at the solution.
        max_iter: Number of Newton steps before giving up.
        history: If a list is given, the largest mismatch of every iterate is
            appended to it.
    """

    pv = np.asarray(ctx.pv, dtype=int)
    pq = np.asarray(ctx.pq, dtype=int)
    pvpq = np.concatenate([pv, pq])
    regulated = np.concatenate([[ctx.ref], pv]).astype(int)

    theta = init.theta - init.theta[ctx.ref]
    v = init.v.copy()
    v[regulated] = ctx.v_set[regulated]
    specified = ctx.p + 1j * ctx.q

    for iteration in range(max_iter + 1):
        voltage = v * np.exp(1j * theta)
        mismatch = voltage * np.conj(adm.ybus @ voltage) - specified
        residual = np.concatenate([mismatch.real[pvpq], mismatch.imag[pq]])
        worst = float(np.max(np.abs(residual))) if residual.size else 0.0
        if history is not None:
            history.append(worst)
        LOGGER.debug('Newton iteration %d: mismatch %.3e', iteration, worst)
        if worst < tol:
            return SystemState(theta=theta, v=v)
        if iteration == max_iter:
            break

        ds_dva, ds_dvm = power_derivatives(voltage, adm.ybus)
        jacobian = sparse.bmat([
            [ds_dva[pvpq][:, pvpq].real, ds_dvm[pvpq][:, pq].real],
            [ds_dva[pq][:, pvpq].imag, ds_dvm[pq][:, pq].imag],
        ], format='csc')
        try:
            step = splu(jacobian).solve(-residual)
        except RuntimeError as exc:
            raise SingularJacobianError(f'power flow Jacobian is singular: {exc}') from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError('power flow Jacobian is singular')
        theta = theta.copy()
        v = v.copy()
        theta[pvpq] += step[:len(pvpq)]
        v[pq] += step[len(pvpq):]

    raise PowerFlowDivergence(max_iter, worst)
