"""
This package assembles the deterministic equivalent of the distributionally
robust OPF (worst-case cost bound, nominal AC power balance, linear robust
constraints), solves it with a primal-dual interior-point method and wraps the
solve in the successive constraint-enforcement loop.
"""

from typing import List

from wdro_opf import WdroOpfError


class InfeasibleProblem(WdroOpfError):
    """The constraints can't all be met, judged by the restoration phase or by
    an uncertainty set that can't be sized.
    """


class SolverFailure(WdroOpfError):
    """The interior-point method stopped without meeting its tolerances"""

    def __init__(self, message: str, report: dict = None):
        self.report = report or {}
        super().__init__(message)


class EnforcementLimit(SolverFailure):
    """The enforcement loop hit its round limit with robust constraints still violated"""

    def __init__(self, rounds: int, unresolved: List[str]):
        self.rounds = rounds
        self.unresolved = list(unresolved)
        super().__init__(
            f'{len(self.unresolved)} quantities still violated after {rounds} enforcement rounds',
            report={'rounds': rounds, 'unresolved': self.unresolved},
        )


# pylint: disable=wrong-import-position
from wdro_opf.opfcore.strategy import OperatingStrategy, strategy_from_json, strategy_to_json
from wdro_opf.opfcore.problem import NlpProblem, VariableLayout, assemble, deterministic_problem
from wdro_opf.opfcore.ipm import IpmResult, restore_feasibility, solve_ipm
from wdro_opf.opfcore.enforcement import (
    EnforcementReport, OpfSettings, initial_point, solve_deterministic, solve_with_enforcement,
)

__all__ = [
    'EnforcementLimit', 'EnforcementReport', 'InfeasibleProblem', 'IpmResult', 'NlpProblem', 'OperatingStrategy',
    'OpfSettings', 'SolverFailure', 'VariableLayout', 'assemble', 'deterministic_problem',
    'initial_point', 'restore_feasibility', 'solve_deterministic', 'solve_ipm',
    'solve_with_enforcement', 'strategy_from_json', 'strategy_to_json',
]
