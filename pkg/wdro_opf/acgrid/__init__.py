"""
This package holds the exact nonlinear AC power flow: bus injections and their
derivatives, a Newton-Raphson solver and the exact response of the system to a
wind forecast error under AGC and AVR control. It is the ground truth every
approximate model is measured against.
"""

from wdro_opf import WdroOpfError


class PowerFlowDivergence(WdroOpfError):
    """Newton-Raphson did not reach the mismatch tolerance"""

    def __init__(self, iterations: int, mismatch: float):
        self.iterations = iterations
        self.mismatch = mismatch
        super().__init__(
            f'power flow did not converge after {iterations} iterations '
            f'(largest mismatch {mismatch:.3e} p.u.)'
        )


class SingularJacobianError(WdroOpfError):
    """The power flow Jacobian could not be factorized"""


# pylint: disable=wrong-import-position
from wdro_opf.acgrid.power import (
    SystemState, branch_flow_derivatives, branch_flows, injections, power_derivatives,
    power_hessian,
)
from wdro_opf.acgrid.newton import DispatchContext, solve_newton
from wdro_opf.acgrid.response import AcResponse, agc_avr_response

__all__ = [
    'AcResponse', 'DispatchContext', 'PowerFlowDivergence', 'SingularJacobianError',
    'SystemState', 'agc_avr_response', 'branch_flow_derivatives', 'branch_flows',
    'injections', 'power_derivatives', 'power_hessian', 'solve_newton',
]
