"""
This package turns every distributionally robust chance constraint into a safe
set of linear constraints. The standardized hypercube is sized so that its
complement has worst-case probability at most ρ over the Wasserstein ball, the
cube is mapped back to the original coordinates and each of its vertices gives
one linear constraint.
"""

from wdro_opf import WdroOpfError


class HypercubeInfeasible(WdroOpfError):
    """Even the largest allowed hypercube leaves more than ρ of worst-case
    probability outside. The chance constraint can't be met with this data.
    """

    def __init__(self, quantity: str, level: float, rho: float):
        self.quantity = quantity
        self.level = level
        self.rho = rho
        super().__init__(
            f'{quantity}: worst-case violation {level:.4g} at the largest hypercube exceeds {rho:.4g}'
        )


# pylint: disable=wrong-import-position
from wdro_opf.chance.hypercube import HypercubeResult, min_sigma, violation_bound, worst_case_violation
from wdro_opf.chance.robust import (
    MonitoredQuantity, RobustConstraintSet, RobustRow, UncertaintySet, build_uncertainty_set,
    emit_robust_constraints, monitored_quantities, reserve_quantity,
)
from wdro_opf.chance.cache import UncertaintyCache
from wdro_opf.chance.sizing import RhoLevels, size_quantities

__all__ = [
    'HypercubeInfeasible', 'HypercubeResult', 'MonitoredQuantity', 'RhoLevels',
    'RobustConstraintSet', 'RobustRow', 'UncertaintyCache', 'UncertaintySet',
    'build_uncertainty_set', 'emit_robust_constraints', 'min_sigma', 'monitored_quantities',
    'reserve_quantity', 'size_quantities', 'violation_bound', 'worst_case_violation',
]
