"""
This module computes the exact system response to a wind forecast error. AGC
shares the total error 1ᵀζ among the units according to their participation
factors, AVR keeps the voltage of the reference and PV buses at their setpoints,
and the reference bus absorbs whatever is left over (mostly the change in
losses). The resulting power flow is solved exactly.
"""

from dataclasses import dataclass
import logging
from typing import TYPE_CHECKING

import numpy as np

from wdro_opf.acgrid.newton import MAX_NEWTON_ITER, TOL_PF, DispatchContext, solve_newton
from wdro_opf.acgrid.power import SystemState, branch_flows, injections
from wdro_opf.case_io import AdmittanceSet, Network

if TYPE_CHECKING:
    from wdro_opf.opfcore.strategy import OperatingStrategy


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


@dataclass(frozen=True, eq=False)
class AcResponse:
    """The operating point reached after the control response.

    Attributes:
        state: Solved voltage angles and magnitudes.
        pg: Realized active output of every generator.
        qg: Realized reactive output of every generator.
        flows: Exact active flow at the from end of every branch.
        losses: Total active losses of the network.
    """

    state: SystemState
    pg: np.ndarray
    qg: np.ndarray
    flows: np.ndarray
    losses: float


# pylint: disable=too-many-locals
def agc_avr_response(
        net: Network,
        adm: AdmittanceSet,
        strategy: 'OperatingStrategy',
        zeta: np.ndarray,
        tol: float = TOL_PF,
        max_iter: int = MAX_NEWTON_ITER,
) -> AcResponse:
    """Solve the exact power flow after the AGC/AVR response to an error zeta.

    Args:
        net: The network the strategy was computed for.
        adm: Its admittance structures.
        strategy: Nominal setpoints, participation factors and reserves.
        zeta: Forecast error of every wind farm (p.u.).
        tol: Newton mismatch tolerance.
        max_iter: Newton iteration limit.
    """

    zeta = np.asarray(zeta, dtype=float)
    omega = float(zeta.sum()) if zeta.size else 0.0
    scheduled = strategy.pg - omega * strategy.alpha
    gen_matrix = net.gen_incidence()
    p_net, q_net = net.net_load(zeta if zeta.size else None)

    ctx = DispatchContext(
        p=gen_matrix @ scheduled - p_net,
        q=gen_matrix @ strategy.qg - q_net,
        v_set=strategy.v,
        ref=net.ref,
        pv=net.pv,
        pq=net.pq,
    )
    init = SystemState(theta=strategy.theta, v=strategy.v)
    state = solve_newton(ctx, adm, init, tol=tol, max_iter=max_iter)
    p_inj, q_inj = injections(state, adm)

    pg = scheduled.copy()
    ref_units = np.flatnonzero(net.gen_bus == net.ref)
    ref_total = p_inj[net.ref] + p_net[net.ref]
    pg[ref_units[0]] = ref_total - pg[ref_units[1:]].sum()

    qg = strategy.qg.copy()
    q_min = net.array('generators', 'q_min')
    q_max = net.array('generators', 'q_max')
    for bus in [net.ref] + list(net.pv):
        units = np.flatnonzero(net.gen_bus == bus)
        total = q_inj[bus] + q_net[bus]
        span = q_max[units] - q_min[units]
        share = span / span.sum() if span.sum() > 0 else np.full(len(units), 1.0 / len(units))
        qg[units] = total * share

    return AcResponse(
        state=state,
        pg=pg,
        qg=qg,
        flows=branch_flows(state, adm),
        losses=float(p_inj.sum()),
    )
