"""
This module contains the primal-dual interior-point method. Inequalities get
slacks z > 0 with multipliers μ > 0, the complementarity target γ shrinks
monotonically, and each iteration takes one Newton step on the reduced KKT
system

    [ M   ∇gᵀ ] [Δx]   [ −N ]       M = ∇²L + ∇hᵀ diag(μ/z) ∇h
    [ ∇g  0   ] [Δλ] = [ −g ]       N = ∇L + ∇hᵀ (μ∘h + γ)/z

followed by the fraction-to-boundary rule on z and μ. Linear rows and variable
bounds are folded into g and h before the loop; rows with equal bounds become
equalities.

When the method doesn't converge, `restore_feasibility` minimizes one elastic
variable s that relaxes every linear inequality row, plus a small proximal term
that gives the free directions curvature. A positive optimum proves (locally)
that no feasible point exists.
"""

from dataclasses import dataclass, field
import logging
import time
from typing import Dict, List

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from wdro_opf.opfcore import SolverFailure


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

XI = 0.99995
SIGMA = 0.1
Z0 = 1.0
FEAS_TOL = 1e-7
GRAD_TOL = 1e-6
COMP_TOL = 1e-6
COST_TOL = 1e-6
MAX_IPM_ITER = 150
INFINITE_BOUND = 1e10
RESTORATION_TOL = 1e-6
PROXIMAL = 1e-6


@dataclass
class IpmResult:  # pylint: disable=too-many-instance-attributes
    """What the interior-point method returns.

    Attributes:
        x: The final iterate.
        f: Its objective value.
        converged: Every tolerance was met.
        iterations: Number of Newton steps taken.
        lam: Multipliers of the equalities (nonlinear ones first).
        mu: Multipliers of the inequalities (nonlinear ones first).
        z: Slacks of the inequalities.
        residuals: Final feasibility, gradient, complementarity and cost measures.
        history: The residuals of every iterate.
        message: Why the method stopped.
        elapsed: Wall time in seconds.
    """

    x: np.ndarray
    f: float
    converged: bool
    iterations: int
    lam: np.ndarray
    mu: np.ndarray
    z: np.ndarray
    residuals: Dict[str, float]
    history: List[Dict[str, float]] = field(default_factory=list)
    message: str = ''
    elapsed: float = 0.0

    def duals(self) -> Dict[str, np.ndarray]:
        """The multipliers and slacks, for a warm start"""

        return {'lam': self.lam, 'mu': self.mu, 'z': self.z}


def _split_linear(problem):
    """Turn l ≤ Ax ≤ u and the bounds into Aeq x = beq and Aiq x ≤ biq"""

    n = problem.size
    matrix = sparse.vstack([problem.a_matrix, sparse.identity(n, format='csr')], format='csr')
    lower = np.concatenate([problem.row_lower, problem.x_lower])
    upper = np.concatenate([problem.row_upper, problem.x_upper])
    lower = np.where(np.isfinite(lower), lower, -np.inf)
    upper = np.where(np.isfinite(upper), upper, np.inf)

    has_low = lower > -INFINITE_BOUND
    has_up = upper < INFINITE_BOUND
    equal = has_low & has_up & (np.abs(upper - lower) <= 1e-12)
    only_up = has_up & ~equal
    only_low = has_low & ~equal
    a_eq = matrix[np.flatnonzero(equal)]
    b_eq = upper[equal]
    a_iq = sparse.vstack([matrix[np.flatnonzero(only_up)], -matrix[np.flatnonzero(only_low)]], format='csr')
    b_iq = np.concatenate([upper[only_up], -lower[only_low]])
    return a_eq, b_eq, a_iq, b_iq


# pylint: disable=too-many-locals,too-many-statements,too-many-arguments
def solve_ipm(
        problem,
        x0: np.ndarray,
        duals: Dict[str, np.ndarray] = None,
        max_iter: int = MAX_IPM_ITER,
        feas_tol: float = FEAS_TOL,
        grad_tol: float = GRAD_TOL,
        comp_tol: float = COMP_TOL,
        cost_tol: float = COST_TOL,
) -> IpmResult:
    """Solve a nonlinear program with the primal-dual interior-point method.

    Args:
        problem: Anything with the evaluation methods of NlpProblem.
        x0: Starting point.
        duals: Multipliers and slacks of an earlier solve of the same problem,
            for a warm start.
        max_iter: Newton step limit.
        feas_tol: Scaled primal feasibility tolerance.
        grad_tol: Scaled Lagrangian gradient tolerance.
        comp_tol: Scaled complementarity tolerance.
        cost_tol: Relative change of the objective between iterates.
    """

    start = time.perf_counter()
    a_eq, b_eq, a_iq, b_iq = _split_linear(problem)
    x = np.array(x0, dtype=float)

    def evaluate(point):
        f_val, df, _ = problem.objective(point)
        g_nl, dg_nl = problem.equalities(point)
        h_nl, dh_nl = problem.inequalities(point)
        g_all = np.concatenate([g_nl, a_eq @ point - b_eq])
        h_all = np.concatenate([h_nl, a_iq @ point - b_iq])
        dg_all = sparse.vstack([dg_nl, a_eq], format='csr')
        dh_all = sparse.vstack([dh_nl, a_iq], format='csr')
        return f_val, df, g_all, dg_all, h_all, dh_all

    f_val, df, g_all, dg_all, h_all, dh_all = evaluate(x)
    n_eq, n_iq = len(g_all), len(h_all)
    n_eq_nl, n_iq_nl = problem.n_eq, problem.n_ineq

    if duals is not None and len(duals['mu']) == n_iq and len(duals['lam']) == n_eq:
        lam, mu, z = duals['lam'].copy(), duals['mu'].copy(), duals['z'].copy()
        gamma = SIGMA * float(z @ mu) / n_iq if n_iq else 0.0
    else:
        z = np.full(n_iq, Z0)
        far = h_all < -Z0
        z[far] = -h_all[far]
        gamma = 1.0
        mu = gamma / z
        lam = np.zeros(n_eq)

    def conditions(point, f_now, f_prev, grad_lag):
        x_norm = np.linalg.norm(point, np.inf) if point.size else 0.0
        z_norm = np.linalg.norm(z, np.inf) if z.size else 0.0
        g_norm = np.linalg.norm(g_all, np.inf) if g_all.size else 0.0
        h_max = max(float(h_all.max()), 0.0) if h_all.size else 0.0
        lam_norm = np.linalg.norm(lam, np.inf) if lam.size else 0.0
        mu_norm = np.linalg.norm(mu, np.inf) if mu.size else 0.0
        return {
            'feas': max(g_norm, h_max) / (1.0 + max(x_norm, z_norm)),
            'grad': float(np.linalg.norm(grad_lag, np.inf)) / (1.0 + max(lam_norm, mu_norm)),
            'comp': float(z @ mu) / (1.0 + x_norm) if n_iq else 0.0,
            'cost': abs(f_now - f_prev) / (1.0 + abs(f_prev)),
        }

    def converged_at(res):
        return (res['feas'] < feas_tol and res['grad'] < grad_tol
                and res['comp'] < comp_tol and res['cost'] < cost_tol)

    grad_lag = df + dg_all.T @ lam + dh_all.T @ mu
    residuals = conditions(x, f_val, f_val, grad_lag)
    history = [dict(residuals, f=f_val, gamma=gamma)]
    converged = converged_at(residuals)
    message = 'converged' if converged else ''
    iteration = 0

    while not converged and iteration < max_iter:
        iteration += 1
        _, _, d2f = problem.objective(x)
        hess = (d2f + problem.equality_hessian(x, lam[:n_eq_nl])
                + problem.inequality_hessian(x, mu[:n_iq_nl]))
        zinv = 1.0 / z
        dh_scaled = sparse.diags(mu * zinv) @ dh_all
        m_mat = hess + dh_all.T @ dh_scaled
        n_vec = grad_lag + dh_all.T @ (zinv * (mu * h_all + gamma))
        kkt = sparse.bmat([[m_mat, dg_all.T], [dg_all, None]], format='csc')
        rhs = np.concatenate([-n_vec, -g_all])
        step = spsolve(kkt, rhs)
        if not np.all(np.isfinite(step)):
            message = 'numerically failed: singular KKT system'
            break
        dx, dlam = step[:problem.size], step[problem.size:]
        dz = -h_all - z - dh_all @ dx
        dmu = -mu + zinv * (gamma - mu * dz)

        alpha_p = 1.0
        shrinking = dz < 0
        if np.any(shrinking):
            alpha_p = min(XI * float(np.min(z[shrinking] / -dz[shrinking])), 1.0)
        alpha_d = 1.0
        shrinking = dmu < 0
        if np.any(shrinking):
            alpha_d = min(XI * float(np.min(mu[shrinking] / -dmu[shrinking])), 1.0)

        x = x + alpha_p * dx
        z = z + alpha_p * dz
        lam = lam + alpha_d * dlam
        mu = mu + alpha_d * dmu
        if n_iq:
            gamma = min(gamma, SIGMA * float(z @ mu) / n_iq)

        f_prev = f_val
        f_val, df, g_all, dg_all, h_all, dh_all = evaluate(x)
        grad_lag = df + dg_all.T @ lam + dh_all.T @ mu
        residuals = conditions(x, f_val, f_prev, grad_lag)
        history.append(dict(residuals, f=f_val, gamma=gamma))
        LOGGER.debug(
            'IPM %3d: f=%.8g feas=%.2e grad=%.2e comp=%.2e step=%.3f/%.3f',
            iteration, f_val, residuals['feas'], residuals['grad'], residuals['comp'], alpha_p, alpha_d,
        )
        if not np.all(np.isfinite(x)) or np.linalg.norm(x, np.inf) > INFINITE_BOUND:
            message = 'numerically failed: iterate diverged'
            break
        converged = converged_at(residuals)

    if converged:
        message = 'converged'
    elif not message:
        message = f'no convergence after {max_iter} iterations'
    elapsed = time.perf_counter() - start
    LOGGER.debug('IPM finished after %d iterations in %.3fs: %s', iteration, elapsed, message)
    return IpmResult(
        x=x, f=f_val, converged=converged, iterations=iteration, lam=lam, mu=mu, z=z,
        residuals=residuals, history=history, message=message, elapsed=elapsed,
    )


class ElasticProblem:
    """A problem whose linear inequality rows are relaxed by one variable s ≥ 0,
    with s + δ/2 ‖x − x₀‖² as the objective. Equality rows, bounds and the
    nonlinear constraints are kept as they are.
    """

    def __init__(self, problem, anchor: np.ndarray, proximal: float = PROXIMAL):
        self.inner = problem
        self.anchor = np.asarray(anchor, dtype=float)
        self.proximal = proximal
        self.size = problem.size + 1
        self.n_eq = problem.n_eq
        self.n_ineq = problem.n_ineq
        lower, upper = problem.row_lower, problem.row_upper
        equal = np.isfinite(lower) & np.isfinite(upper) & (np.abs(upper - lower) <= 1e-12)
        has_up = ~equal & np.isfinite(upper)
        has_low = ~equal & np.isfinite(lower)

        def with_column(mask, value):
            rows = problem.a_matrix[np.flatnonzero(mask)]
            column = sparse.csr_matrix(np.full((rows.shape[0], 1), value))
            return sparse.hstack([rows, column], format='csr')

        # a·x = b stays, a·x − s ≤ u and a·x + s ≥ l
        self.a_matrix = sparse.vstack(
            [with_column(equal, 0.0), with_column(has_up, -1.0), with_column(has_low, 1.0)], format='csr',
        )
        self.row_lower = np.concatenate([lower[equal], np.full(int(has_up.sum()), -np.inf), lower[has_low]])
        self.row_upper = np.concatenate([upper[equal], upper[has_up], np.full(int(has_low.sum()), np.inf)])
        self.x_lower = np.concatenate([problem.x_lower, [0.0]])
        self.x_upper = np.concatenate([problem.x_upper, [np.inf]])

    def objective(self, x: np.ndarray):
        """s plus the proximal term that keeps x near its anchor"""

        shift = x[:-1] - self.anchor
        grad = np.append(self.proximal * shift, 1.0)
        hess = sparse.diags(np.append(np.full(shift.size, self.proximal), 0.0), format='csr')
        return float(x[-1] + 0.5 * self.proximal * shift @ shift), grad, hess

    def equalities(self, x: np.ndarray):
        """The inner equalities with a zero column for s"""

        g_val, jac = self.inner.equalities(x[:-1])
        return g_val, sparse.hstack([jac, sparse.csr_matrix((jac.shape[0], 1))], format='csr')

    def equality_hessian(self, x: np.ndarray, lam: np.ndarray):
        """The inner Hessian padded by one row and column"""

        return sparse.block_diag([self.inner.equality_hessian(x[:-1], lam), sparse.csr_matrix((1, 1))], format='csr')

    def inequalities(self, x: np.ndarray):
        """The inner nonlinear inequalities with a zero column for s"""

        h_val, jac = self.inner.inequalities(x[:-1])
        return h_val, sparse.hstack([jac, sparse.csr_matrix((jac.shape[0], 1))], format='csr')

    def inequality_hessian(self, x: np.ndarray, mu: np.ndarray):
        """The inner Hessian padded by one row and column"""

        return sparse.block_diag([self.inner.inequality_hessian(x[:-1], mu), sparse.csr_matrix((1, 1))], format='csr')


def restore_feasibility(problem, x0: np.ndarray, max_iter: int = MAX_IPM_ITER) -> float:
    """Find the smallest uniform relaxation s of the linear inequality rows
    that admits a solution. Returns s, or raises SolverFailure when even the
    relaxed problem can't be solved.

    Args:
        problem: The problem the interior-point method failed on.
        x0: Starting point of the original variables.
        max_iter: Newton step limit.
    """

    elastic = ElasticProblem(problem, x0)
    violation = problem.a_matrix @ x0
    excess = np.maximum(np.maximum(violation - problem.row_upper, problem.row_lower - violation), 0.0)
    start = np.concatenate([x0, [float(np.max(excess, initial=0.0)) + 1.0]])
    result = solve_ipm(elastic, start, max_iter=max_iter)
    if not result.converged:
        raise SolverFailure(
            f'restoration phase failed: {result.message}', {'residuals': result.residuals},
        )
    slack = float(result.x[-1])
    LOGGER.info('Restoration phase: smallest relaxation %.3e after %d iterations', slack, result.iterations)
    return slack
