"""
This package holds the benchmark formulations that share the OPF skeleton:
robust optimization over the whole support box, the moment-based (Chebyshev)
and Gaussian chance constraints enforced with cutting planes, and the
DC-OPF with the data-driven chance constraints on flows and reserves.
"""

from wdro_opf import WdroOpfError


class CuttingPlaneLimit(WdroOpfError):
    """The cutting-plane loop hit its round limit with margins still violated"""

    def __init__(self, rounds: int, violation: float):
        self.rounds = rounds
        self.violation = violation
        super().__init__(
            f'cutting planes did not converge in {rounds} rounds, largest margin violation {violation:.3e}'
        )


# pylint: disable=wrong-import-position
from wdro_opf.rivals.methods import (
    METHODS, MethodConfig, benchmark_omega, moment_margin, moment_sizer, ro_sizer, ro_vertices,
)
from wdro_opf.rivals.cutting_plane import MomentStats, cutting_plane_solve, soc_cuts
from wdro_opf.rivals.dc import DcProblem, dc_matrices, dc_opf, dc_response
from wdro_opf.rivals.dispatch import ro_solve, solve_method

__all__ = [
    'CuttingPlaneLimit', 'DcProblem', 'METHODS', 'MethodConfig', 'MomentStats', 'benchmark_omega',
    'cutting_plane_solve', 'dc_matrices', 'dc_opf', 'dc_response', 'moment_margin', 'moment_sizer',
    'ro_sizer', 'ro_solve', 'ro_vertices', 'soc_cuts', 'solve_method',
]
