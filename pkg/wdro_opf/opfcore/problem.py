"""
This module assembles the nonlinear program solved for a strategy

    min  f(x)
    s.t. g(x) = 0              nominal AC power balance
         h(x) ≤ 0              λ ≥ η′(ω̄), λ ≥ −η′(ω̲)
         l ≤ A x ≤ u           Σα = 1, reserve availability, robust rows
         x_min ≤ x ≤ x_max

over x = (θ, v, p^g, q^g, α, r̄, r̲, λ). The objective is the worst-case cost
bound written out per generator

    Σ_i c_{i2}(m₂α_i² − 2m₁p_iα_i + p_i²) + c_{i1}(p_i − m₁α_i) + c_{i0}
        + c̄ᵀr̄ + c̲ᵀr̲ + ε_ω λ

with m₁, m₂ the first two sample moments of ω. It is quadratic, so it is kept
as a sparse matrix and a vector. λ is left out when ε_ω is zero, the bound then
reduces to the sample average. The cost is multiplied by COST_SCALE inside the
problem so the solver tolerances are meaningful in $/h.

The problem exposes the evaluation methods the interior-point solver expects:
objective, equalities, equality_hessian, inequalities, inequality_hessian, and
the linear data a_matrix, row_lower, row_upper, x_lower, x_upper.
"""

from dataclasses import dataclass
import logging
from typing import Dict, List, Sequence

import numpy as np
from scipy import sparse

from wdro_opf.acgrid import SystemState, power_derivatives, power_hessian
from wdro_opf.case_io import AdmittanceSet, Network
from wdro_opf.chance import RobustRow
from wdro_opf.costdro import OmegaSamples
from wdro_opf.linresponse import ResponseMatrices
from wdro_opf.opfcore.strategy import OperatingStrategy


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

COST_SCALE = 1e-4
BLOCKS = ('theta', 'v', 'pg', 'qg', 'alpha', 'r_up', 'r_dn', 'lam')


class VariableLayout:
    """Where every block of the decision vector sits"""

    def __init__(self, n_bus: int, n_gen: int, with_lambda: bool):
        self.n_bus = n_bus
        self.n_gen = n_gen
        self.with_lambda = with_lambda
        sizes = [n_bus, n_bus, n_gen, n_gen, n_gen, n_gen, n_gen, 1 if with_lambda else 0]
        self.slices: Dict[str, slice] = {}
        start = 0
        for name, size in zip(BLOCKS, sizes):
            self.slices[name] = slice(start, start + size)
            start += size
        self.size = start

    def __getitem__(self, name: str) -> slice:
        return self.slices[name]

    def positions(self, name: str) -> np.ndarray:
        """Indices of a block"""

        block = self.slices[name]
        return np.arange(block.start, block.stop)

    def pack(self, strategy: OperatingStrategy) -> np.ndarray:
        """Stack a strategy into a decision vector"""

        x = np.zeros(self.size)
        for name in BLOCKS[:-1]:
            x[self.slices[name]] = getattr(strategy, name)
        if self.with_lambda:
            x[self.slices['lam']] = strategy.lam
        return x

    def unpack(self, x: np.ndarray, method: str = 'wdro') -> OperatingStrategy:
        """Read a strategy back out of a decision vector"""

        values = {name: np.array(x[self.slices[name]]) for name in BLOCKS[:-1]}
        lam = float(x[self.slices['lam']][0]) if self.with_lambda else 0.0
        return OperatingStrategy(lam=lam, method=method, **values)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """½xᵀQx + bᵀx + c"""

    quad: sparse.csr_matrix
    lin: np.ndarray
    const: float = 0.0

    def value(self, x: np.ndarray) -> float:
        """Evaluate the form"""

        return float(0.5 * x @ (self.quad @ x) + self.lin @ x + self.const)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Qx + b"""

        return self.quad @ x + self.lin


class NlpProblem:  # pylint: disable=too-many-instance-attributes
    """One assembled OPF, ready for the interior-point method.

    Args:
        net: The network.
        adm: Its admittance structures.
        layout: The variable layout.
        objective: The (scaled) quadratic objective.
        cost_rows: Quadratic forms h_j(x) ≤ 0 of the cost multiplier.
        a_matrix: Linear constraint rows.
        row_lower: Lower bounds of the rows.
        row_upper: Upper bounds of the rows.
        row_names: A label for every linear row.
        x_lower: Lower variable bounds.
        x_upper: Upper variable bounds.
    """

    # pylint: disable=too-many-arguments
    def __init__(
            self,
            net: Network,
            adm: AdmittanceSet,
            layout: VariableLayout,
            objective: QuadraticForm,
            cost_rows: Sequence[QuadraticForm],
            a_matrix: sparse.csr_matrix,
            row_lower: np.ndarray,
            row_upper: np.ndarray,
            row_names: List[str],
            x_lower: np.ndarray,
            x_upper: np.ndarray,
    ):
        self.net = net
        self.adm = adm
        self.layout = layout
        self.cost = objective
        self.cost_rows = list(cost_rows)
        self.a_matrix = sparse.csr_matrix(a_matrix)
        self.row_lower = row_lower
        self.row_upper = row_upper
        self.row_names = row_names
        self.x_lower = x_lower
        self.x_upper = x_upper
        self.size = layout.size
        self.gen_matrix = sparse.csr_matrix(net.gen_incidence())
        self.p_net, self.q_net = net.net_load()

    @property
    def n_eq(self) -> int:
        """Number of nonlinear equalities"""

        return 2 * self.layout.n_bus

    @property
    def n_ineq(self) -> int:
        """Number of nonlinear inequalities"""

        return len(self.cost_rows)

    def objective(self, x: np.ndarray):
        """(f, ∇f, ∇²f) of the scaled objective"""

        return self.cost.value(x), self.cost.gradient(x), self.cost.quad

    def _voltage(self, x: np.ndarray) -> np.ndarray:
        layout = self.layout
        return x[layout['v']] * np.exp(1j * x[layout['theta']])

    def equalities(self, x: np.ndarray):
        """The power balance mismatch S(θ, v) − C_g(p^g + jq^g) + (p_net + jq_net)
        split into real and imaginary rows, and its Jacobian.
        """

        layout = self.layout
        voltage = self._voltage(x)
        injected = voltage * np.conj(self.adm.ybus @ voltage)
        generated = self.gen_matrix @ (x[layout['pg']] + 1j * x[layout['qg']])
        mismatch = injected - generated + (self.p_net + 1j * self.q_net)
        ds_dva, ds_dvm = power_derivatives(voltage, self.adm.ybus)
        n_bus, n_gen = layout.n_bus, layout.n_gen
        rest = layout.size - 2 * n_bus - 2 * n_gen
        jacobian = sparse.bmat([
            [ds_dva.real, ds_dvm.real, -self.gen_matrix, None, sparse.csr_matrix((n_bus, rest))],
            [ds_dva.imag, ds_dvm.imag, None, -self.gen_matrix, sparse.csr_matrix((n_bus, rest))],
        ], format='csr')
        return np.concatenate([mismatch.real, mismatch.imag]), jacobian

    def equality_hessian(self, x: np.ndarray, lam: np.ndarray) -> sparse.csr_matrix:
        """∇²(λᵀg), only the (θ, v) block is nonzero"""

        n_bus = self.layout.n_bus
        block = power_hessian(self._voltage(x), self.adm.ybus, lam[:n_bus], lam[n_bus:])
        pad = self.size - 2 * n_bus
        return sparse.block_diag([block, sparse.csr_matrix((pad, pad))], format='csr')

    def inequalities(self, x: np.ndarray):
        """The cost multiplier rows and their Jacobian"""

        if not self.cost_rows:
            return np.zeros(0), sparse.csr_matrix((0, self.size))
        values = np.array([row.value(x) for row in self.cost_rows])
        jacobian = sparse.csr_matrix(np.vstack([row.gradient(x) for row in self.cost_rows]))
        return values, jacobian

    def inequality_hessian(self, x: np.ndarray, mu: np.ndarray) -> sparse.csr_matrix:  # pylint: disable=unused-argument
        """∇²(μᵀh)"""

        hess = sparse.csr_matrix((self.size, self.size))
        for weight, row in zip(mu, self.cost_rows):
            hess = hess + weight * row.quad
        return hess

    def true_cost(self, x: np.ndarray) -> float:
        """The objective in $/h"""

        return self.cost.value(x) / COST_SCALE


class _RowBuilder:
    """Collects sparse linear rows with their bounds and names"""

    def __init__(self, size: int):
        self.size = size
        self.rows, self.cols, self.vals = [], [], []
        self.lower, self.upper, self.names = [], [], []

    def add(self, columns, values, lower: float, upper: float, name: str) -> None:
        """Append one row"""

        row = len(self.lower)
        for col, val in zip(columns, values):
            if val != 0:
                self.rows.append(row)
                self.cols.append(int(col))
                self.vals.append(float(val))
        self.lower.append(lower)
        self.upper.append(upper)
        self.names.append(name)

    def build(self):
        """(A, l, u, names)"""

        matrix = sparse.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(len(self.lower), self.size),
        )
        return matrix, np.array(self.lower, dtype=float), np.array(self.upper, dtype=float), self.names


def _add_robust_row(builder: _RowBuilder, layout: VariableLayout, rm: ResponseMatrices, row: RobustRow) -> None:
    alpha_cols = layout.positions('alpha')
    if row.kind == 'voltage':
        columns, values = [layout['v'].start + row.index], [1.0]
    elif row.kind == 'reactive':
        columns = [layout['qg'].start + unit for unit in row.units]
        values = [1.0] * len(columns)
    elif row.kind == 'flow':
        columns = list(layout.positions('theta')) + list(layout.positions('v'))
        values = list(rm.flow_theta[row.index]) + list(rm.flow_v[row.index])
    elif row.kind == 'reserve_dn':
        columns, values = [layout['r_dn'].start + row.index], [-1.0]
    elif row.kind == 'reserve_up':
        columns, values = [layout['r_up'].start + row.index], [-1.0]
    else:
        raise ValueError(f'unknown robust row kind "{row.kind}"')
    merged: Dict[int, float] = {}
    for col, val in zip(list(columns) + list(alpha_cols), list(values) + list(row.alpha_coeff)):
        merged[col] = merged.get(col, 0.0) + val
    builder.add(
        merged.keys(), merged.values(), row.lower - row.offset, row.upper - row.offset,
        f'{row.qid}:{row.kind}',
    )


def _bounds(net: Network, layout: VariableLayout, stochastic: bool):
    lower = np.full(layout.size, -np.inf)
    upper = np.full(layout.size, np.inf)
    lower[layout['theta'].start + net.ref] = 0.0
    upper[layout['theta'].start + net.ref] = 0.0
    lower[layout['v']] = net.array('buses', 'v_min')
    upper[layout['v']] = net.array('buses', 'v_max')
    lower[layout['pg']] = net.array('generators', 'p_min')
    upper[layout['pg']] = net.array('generators', 'p_max')
    lower[layout['qg']] = net.array('generators', 'q_min')
    upper[layout['qg']] = net.array('generators', 'q_max')
    for name in ('alpha', 'r_up', 'r_dn'):
        lower[layout[name]] = 0.0
        upper[layout[name]] = 0.0
    if stochastic:
        degenerate = np.array([gen.degenerate for gen in net.generators], dtype=bool)
        upper[layout['alpha']] = np.where(degenerate, 0.0, 1.0)
        upper[layout['r_up']] = np.inf
        upper[layout['r_dn']] = np.inf
    if layout.with_lambda:
        lower[layout['lam']] = 0.0
    return lower, upper


def _cost_forms(net: Network, layout: VariableLayout, omega: OmegaSamples):
    """The scaled objective and the two multiplier rows"""

    n = layout.size
    costs = np.array([gen.cost for gen in net.generators], dtype=float).reshape(-1, 3)
    c_quad, c_lin, c_const = costs[:, 0], costs[:, 1], costs[:, 2]
    pg, alpha = layout.positions('pg'), layout.positions('alpha')
    m1, m2 = (omega.m1, omega.m2) if omega is not None else (0.0, 0.0)

    def form(diag_p, diag_a, cross):
        rows = np.concatenate([pg, alpha, pg, alpha])
        cols = np.concatenate([pg, alpha, alpha, pg])
        vals = np.concatenate([diag_p, diag_a, cross, cross])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))

    lin = np.zeros(n)
    lin[pg] = c_lin
    lin[alpha] = -m1 * c_lin
    lin[layout['r_up']] = net.array('generators', 'reserve_up_price')
    lin[layout['r_dn']] = net.array('generators', 'reserve_down_price')
    if layout.with_lambda:
        lin[layout['lam']] = omega.epsilon
    quad = form(2.0 * c_quad, 2.0 * m2 * c_quad, -2.0 * m1 * c_quad)
    objective = QuadraticForm(quad * COST_SCALE, lin * COST_SCALE, float(c_const.sum()) * COST_SCALE)

    cost_rows = []
    if layout.with_lambda:
        zeros = np.zeros(len(pg))
        c2_quad = form(zeros, 2.0 * c_quad, zeros)  # ½xᵀ(·)x = c₂
        c1_quad = form(zeros, zeros, 2.0 * c_quad)  # ½xᵀ(·)x + c1_lin·x = c₁
        c1_lin = np.zeros(n)
        c1_lin[alpha] = c_lin
        lam_lin = np.zeros(n)
        lam_lin[layout['lam']] = -1.0
        # η′(ω̄) − λ ≤ 0 and −η′(ω̲) − λ ≤ 0, η′(ω) = 2c₂ω − c₁
        cost_rows.append(QuadraticForm(
            (2.0 * omega.upper * c2_quad - c1_quad) * COST_SCALE, (-c1_lin + lam_lin) * COST_SCALE,
        ))
        cost_rows.append(QuadraticForm(
            (c1_quad - 2.0 * omega.lower * c2_quad) * COST_SCALE, (c1_lin + lam_lin) * COST_SCALE,
        ))
    return objective, cost_rows


# pylint: disable=too-many-arguments,too-many-locals
def assemble(
        net: Network,
        adm: AdmittanceSet,
        rm: ResponseMatrices,
        robust_rows: Sequence[RobustRow],
        omega: OmegaSamples,
        stochastic: bool = True,
) -> NlpProblem:
    """Assemble the OPF with the given robust rows.

    Args:
        net: The network.
        adm: Its admittance structures.
        rm: Response matrices, for the nominal flow map of flow rows.
        robust_rows: The rows of every enforced chance constraint.
        omega: Samples, support and radius of the total forecast error. None
            gives the deterministic cost.
        stochastic: Free α and the reserves. Without it they are fixed at zero
            and the problem is the deterministic AC-OPF.
    """

    with_lambda = stochastic and omega is not None and omega.epsilon > 0
    layout = VariableLayout(net.n_bus, net.n_gen, with_lambda)
    builder = _RowBuilder(layout.size)
    if stochastic:
        builder.add(layout.positions('alpha'), np.ones(net.n_gen), 1.0, 1.0, 'alpha_sum')
        p_min = net.array('generators', 'p_min')
        p_max = net.array('generators', 'p_max')
        for i in range(net.n_gen):
            builder.add(
                [layout['pg'].start + i, layout['r_up'].start + i], [1.0, 1.0],
                -np.inf, p_max[i], f'reserve_up_room:{i}',
            )
            builder.add(
                [layout['pg'].start + i, layout['r_dn'].start + i], [1.0, -1.0],
                p_min[i], np.inf, f'reserve_dn_room:{i}',
            )
    for row in robust_rows:
        _add_robust_row(builder, layout, rm, row)
    a_matrix, row_lower, row_upper, names = builder.build()
    x_lower, x_upper = _bounds(net, layout, stochastic)
    objective, cost_rows = _cost_forms(net, layout, omega if stochastic else None)
    problem = NlpProblem(
        net, adm, layout, objective, cost_rows, a_matrix, row_lower, row_upper, names, x_lower, x_upper,
    )
    LOGGER.debug(
        'Assembled OPF: %d variables, %d equalities, %d nonlinear and %d linear inequalities',
        layout.size, problem.n_eq, problem.n_ineq, a_matrix.shape[0],
    )
    return problem


def deterministic_problem(net: Network, adm: AdmittanceSet, rm: ResponseMatrices, flow_rows: bool = True) -> NlpProblem:
    """The deterministic AC-OPF: generation cost only, no regulation or reserve.
    Enforced branches keep their nominal limits on the linear flow map.
    """

    rows = []
    if flow_rows:
        for k, branch in enumerate(net.branches):
            if branch.enforced:
                rows.append(RobustRow(
                    qid=f'flow:{branch.from_bus}-{branch.to_bus}#{k}', kind='flow', index=k,
                    alpha_coeff=np.zeros(net.n_gen), offset=0.0, lower=-branch.rate, upper=branch.rate,
                ))
    return assemble(net, adm, rm, rows, None, stochastic=False)


def state_of(problem: NlpProblem, x: np.ndarray) -> SystemState:
    """The voltage state inside a decision vector"""

    return SystemState(theta=np.array(x[problem.layout['theta']]), v=np.array(x[problem.layout['v']]))


def row_violations(layout: VariableLayout, rm: ResponseMatrices, rows: Sequence[RobustRow], x: np.ndarray) -> np.ndarray:
    """How far every robust row is outside its bounds at x, 0 where it holds"""

    if not rows:
        return np.zeros(0)
    builder = _RowBuilder(layout.size)
    for row in rows:
        _add_robust_row(builder, layout, rm, row)
    matrix, lower, upper, _ = builder.build()
    values = matrix @ x
    return np.maximum(np.maximum(lower - values, values - upper), 0.0)
