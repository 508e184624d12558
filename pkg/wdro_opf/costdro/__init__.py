"""
This package evaluates the worst-case expected cost of a strategy over the
Wasserstein ball of the total forecast error: exactly, for reporting, and as
the upper bound the solver minimizes.
"""

from wdro_opf.costdro.worst_case import (
    CostAggregate, ObjectiveReport, OmegaSamples, cost_coeffs, objective_report,
    worst_case_cost_exact, worst_case_cost_ub,
)

__all__ = [
    'CostAggregate', 'ObjectiveReport', 'OmegaSamples', 'cost_coeffs', 'objective_report',
    'worst_case_cost_exact', 'worst_case_cost_ub',
]
