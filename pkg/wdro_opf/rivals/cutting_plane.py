"""
The moment-based methods ask every monitored quantity to keep

    nominal + μ_ω c + μ_t ± k sqrt(wᵀ Σ̂ w) within its limits,  w = (c, 1),  c = A_i C_g α

which is a second-order cone constraint in α. Its standard deviation term is
convex and homogeneous in w, so at any α₀ it lies above the linear function
(Σ̂w₀)ᵀw / s₀, s₀ = sqrt(w₀ᵀΣ̂w₀), and touches it at α₀. Replacing the square
root by that function gives a linear row of the same shape as a robust vertex
row, with the pseudo vertex (μ_ω, μ_t) ± k Σ̂w₀ / s₀.

The loop solves, generates the cuts of every quantity at the solution and adds
the violated ones. A cut generated at x holds at x exactly when the cone
constraint does, so the loop stops with every margin met.
"""

from dataclasses import dataclass
import logging
import math
import time
from typing import Dict, List, Tuple

import numpy as np

from wdro_opf.case_io import AdmittanceSet, Network
from wdro_opf.chance import MonitoredQuantity, RobustRow
from wdro_opf.opfcore.enforcement import (
    EnforcementReport, finish, prepare, solve_problem, stochastic_start,
)
from wdro_opf.opfcore.problem import row_violations
from wdro_opf.opfcore.strategy import OperatingStrategy
from wdro_opf.rivals import CuttingPlaneLimit
from wdro_opf.rivals.methods import MOMENT_METHODS, MethodConfig, benchmark_omega, moment_margin, moment_sizer
from wdro_opf.wasserstein import SampleSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

SPREAD_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MomentStats:
    """Sample mean and covariance of a quantity's (ω, t)"""

    mean: np.ndarray
    cov: np.ndarray


def soc_cuts(quantity: MonitoredQuantity, stats: MomentStats, margin: float, alpha: np.ndarray) -> List[RobustRow]:
    """The linear cuts of a quantity's cone constraints at the participation
    factors alpha, one per finite limit.

    Args:
        quantity: The monitored quantity.
        stats: Moments of its (ω, t).
        margin: The number of standard deviations k.
        alpha: Participation factors the cut touches the cone at.
    """

    alpha_row = np.asarray(quantity.alpha_row, dtype=float)
    weights = np.array([float(alpha_row @ alpha), 1.0])
    leaning = stats.cov @ weights
    spread = math.sqrt(max(float(weights @ leaning), 0.0))
    shift = margin * leaning / spread if spread > SPREAD_FLOOR else np.zeros(2)
    rows = []
    if math.isfinite(quantity.upper):
        high = stats.mean + shift
        rows.append(RobustRow(
            qid=quantity.qid, kind=quantity.kind, index=quantity.index,
            alpha_coeff=high[0] * alpha_row, offset=float(high[1]),
            lower=-math.inf, upper=quantity.upper, units=quantity.units,
        ))
    if math.isfinite(quantity.lower):
        low = stats.mean - shift
        rows.append(RobustRow(
            qid=quantity.qid, kind=quantity.kind, index=quantity.index,
            alpha_coeff=low[0] * alpha_row, offset=float(low[1]),
            lower=quantity.lower, upper=math.inf, units=quantity.units,
        ))
    return rows


def _moments(quantities: List[MonitoredQuantity], samples: SampleSet) -> Dict[str, MomentStats]:
    if samples is None or samples.dim == 0:
        return {quantity.qid: MomentStats(np.zeros(2), np.zeros((2, 2))) for quantity in quantities}
    stats = {}
    for quantity in quantities:
        projected = samples.project(quantity.projection)
        stats[quantity.qid] = MomentStats(projected.mean, projected.cov)
    return stats


# pylint: disable=too-many-locals
def cutting_plane_solve(
        net: Network,
        samples: SampleSet,
        config: MethodConfig,
        adm: AdmittanceSet = None,
) -> Tuple[OperatingStrategy, EnforcementReport]:
    """Compute the MDRO or GSP strategy.

    Args:
        net: The network.
        samples: Forecast errors, one column per wind farm.
        config: The method, 'mdro' or 'gsp', with its settings.
        adm: Admittance structures, built when not given.

    Raises:
        CuttingPlaneLimit: when margins are still violated after
            config.cut_rounds rounds.
    """

    if config.method not in MOMENT_METHODS:
        raise ValueError(f'cutting planes serve {", ".join(MOMENT_METHODS)}, not "{config.method}"')
    settings = config.opf_settings
    if net.n_wind == 0:
        samples = None
    ctx = prepare(net, samples, settings, adm, sizer=moment_sizer(config.method))
    ctx.omega = benchmark_omega(ctx.omega)
    constraints = ctx.constraints
    constraints.enforce(['reserve'])
    cut_quantities = [quantity for quantity in constraints.quantities.values() if quantity.kind != 'reserve']
    stats = _moments(cut_quantities, samples)
    margins = {
        quantity.qid: moment_margin(settings.rho.for_kind(quantity.kind), config.method)
        for quantity in cut_quantities
    }

    report = EnforcementReport(method=config.method)
    problem = ctx.assemble(constraints.rows())
    x = stochastic_start(ctx, problem.layout)
    duals = None
    start = time.perf_counter()
    while True:
        report.rounds += 1
        result = solve_problem(problem, x, duals)
        x, duals = result.x, result.duals()
        report.iterations.append(result.iterations)
        alpha = x[problem.layout['alpha']]
        new_cuts: Dict[str, List[RobustRow]] = {}
        worst = 0.0
        for quantity in cut_quantities:
            rows = soc_cuts(quantity, stats[quantity.qid], margins[quantity.qid], alpha)
            excess = row_violations(problem.layout, ctx.rm, rows, x)
            kept = [row for row, amount in zip(rows, excess) if amount > config.cut_tol]
            if kept:
                new_cuts[quantity.qid] = kept
                worst = max(worst, float(excess.max()))
        LOGGER.info(
            'Cutting-plane round %d: %d quantities cut, largest margin violation %.3e',
            report.rounds, len(new_cuts), worst,
        )
        if not new_cuts:
            break
        if report.rounds >= config.cut_rounds:
            raise CuttingPlaneLimit(report.rounds, worst)
        for qid, rows in new_cuts.items():
            constraints.extra_rows.setdefault(qid, []).extend(rows)
        constraints.enforce(new_cuts)
        problem = ctx.assemble(constraints.rows())
    report.timings['cutting_planes'] = time.perf_counter() - start
    report.enforced = list(constraints.enforced)
    return finish(ctx, problem, result, report, config.method), report
