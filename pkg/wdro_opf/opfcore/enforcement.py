"""
This module runs the successive constraint-enforcement scheme around the
interior-point solver.

All voltage, reactive and flow chance constraints start relaxed, only the
reserve constraints are enforced from the first round. After every solve the
robust rows of all candidate quantities are evaluated at the solution and the
violated quantities join the problem for the next round. The loop stops when
nothing is violated or after ENFORCEMENT_ROUNDS rounds.

The starting point comes from the deterministic AC-OPF, which itself starts
from a Newton power flow at the initial dispatch of the case.
"""

from dataclasses import dataclass, field
import logging
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from wdro_opf.acgrid import (
    DispatchContext, PowerFlowDivergence, SingularJacobianError, SystemState, branch_flows, solve_newton,
)
from wdro_opf.case_io import AdmittanceSet, Network, build_admittance
from wdro_opf.chance import (
    HypercubeInfeasible, MonitoredQuantity, RhoLevels, RobustConstraintSet, RobustRow, UncertaintyCache,
    UncertaintySet, emit_robust_constraints, monitored_quantities, reserve_quantity, size_quantities,
)
from wdro_opf.chance.robust import KINDS
from wdro_opf.chance.sizing import Sizer, wasserstein_sizer
from wdro_opf.costdro import ObjectiveReport, OmegaSamples, cost_coeffs, objective_report
from wdro_opf.linresponse import ResponseMatrices, build_response
from wdro_opf.opfcore import EnforcementLimit, InfeasibleProblem, SolverFailure
from wdro_opf.opfcore.ipm import RESTORATION_TOL, IpmResult, restore_feasibility, solve_ipm
from wdro_opf.opfcore.problem import (
    NlpProblem, VariableLayout, assemble, deterministic_problem, row_violations, state_of,
)
from wdro_opf.opfcore.strategy import OperatingStrategy
from wdro_opf.wasserstein import AmbiguityError, SampleSet
from wdro_opf.wasserstein.sample_set import SIGMA_MAX


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

ENFORCEMENT_ROUNDS = 20
VIOLATION_TOL = 1e-6
INITIAL_RESERVE = 0.01


@dataclass(frozen=True)
class OpfSettings:  # pylint: disable=too-many-instance-attributes
    """Everything that shapes one strategy computation.

    Attributes:
        rho: Violation probabilities of the four constraint families.
        beta: Confidence of the Wasserstein balls.
        sigma_max: Half side of the standardized support box.
        fallback: Size the balls from the support diameter instead of C.
        relax: Families whose chance constraints are left out entirely,
            any of 'voltage', 'reactive' and 'flow'.
        linearization: 'lpf' or 'jacobian' response matrices.
        max_rounds: Enforcement round limit.
        violation_tol: Smallest violation that makes a quantity enforced.
        jobs: Worker threads for sizing the uncertainty sets.
        cache_path: JSON file of sized uncertainty sets, or None.
        enforce_all: Start with every quantity enforced.
        method: Tag written into the strategy.
    """

    rho: RhoLevels = field(default_factory=RhoLevels)
    beta: float = 0.9
    sigma_max: float = SIGMA_MAX
    fallback: bool = False
    relax: Tuple[str, ...] = ()
    linearization: str = 'lpf'
    max_rounds: int = ENFORCEMENT_ROUNDS
    violation_tol: float = VIOLATION_TOL
    jobs: int = 1
    cache_path: Optional[str] = None
    enforce_all: bool = False
    method: str = 'wdro'

    def __post_init__(self):
        unknown = set(self.relax) - set(KINDS)
        if unknown:
            raise ValueError(f'can only relax {", ".join(KINDS)}, got {sorted(unknown)}')
        if self.max_rounds < 1:
            raise ValueError(f'max_rounds must be positive, got {self.max_rounds}')


@dataclass
class EnforcementReport:  # pylint: disable=too-many-instance-attributes
    """What happened while computing a strategy.

    Attributes:
        method: The formulation.
        rounds: Number of solves of the outer loop.
        enforced: Quantities enforced in the final problem, in the order they
            were added.
        iterations: Interior-point iterations of every round.
        objective: The objective three ways, in $/h.
        residuals: Scaled KKT residuals of the final solve.
        mismatch: Largest nominal power balance mismatch at the solution (p.u.).
        exact_flows: From-end active branch flows of the AC solution (p.u.).
        sigma: Half side of the hypercube of every sized quantity.
        timings: Wall time of the stages in seconds.
    """

    method: str
    rounds: int = 0
    enforced: List[str] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)
    objective: Optional[ObjectiveReport] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    mismatch: float = 0.0
    exact_flows: Optional[np.ndarray] = None
    sigma: Dict[str, float] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def as_meta(self, net: Network) -> Dict:
        """The report as JSON-ready metadata of the strategy file"""

        meta = {
            'enforcement': {
                'rounds': self.rounds,
                'enforced': list(self.enforced),
                'iterations': list(self.iterations),
            },
            'residuals': {key: float(value) for key, value in self.residuals.items()},
            'mismatch': float(self.mismatch),
            'timings': {key: round(float(value), 6) for key, value in self.timings.items()},
            'sigma': {key: float(value) for key, value in self.sigma.items()},
        }
        if self.objective is not None:
            meta['objective'] = {
                'bound': self.objective.bound,
                'exact': self.objective.exact,
                'sample_average': self.objective.sample_average,
                'multiplier': self.objective.multiplier,
                'gap': self.objective.gap,
            }
        if self.exact_flows is not None:
            meta['exact_flows_mw'] = [float(flow * net.base_mva) for flow in self.exact_flows]
        return meta


@dataclass
class SolveContext:  # pylint: disable=too-many-instance-attributes
    """The prepared inputs of the enforcement loop.

    Attributes:
        net: The network.
        adm: Its admittance structures.
        rm: Response matrices of the chosen linearization.
        omega: Samples, support and radius of the total forecast error.
        constraints: Monitored quantities with their uncertainty sets.
        start: The deterministic OPF solution the stochastic solve starts from.
        sigma: Half side of every sized hypercube.
        timings: Wall time of the preparation stages.
        assembler: Builds the problem of a set of robust rows; the AC problem
            of assemble by default.
    """

    net: Network
    adm: AdmittanceSet
    rm: ResponseMatrices
    omega: OmegaSamples
    constraints: RobustConstraintSet
    start: OperatingStrategy
    sigma: Dict[str, float] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    assembler: Optional[Callable[['SolveContext', List[RobustRow]], NlpProblem]] = None

    def assemble(self, rows: List[RobustRow]) -> NlpProblem:
        """The problem with the given robust rows"""

        if self.assembler is not None:
            return self.assembler(self, rows)
        return assemble(self.net, self.adm, self.rm, rows, self.omega)


def initial_point(net: Network, adm: AdmittanceSet = None) -> OperatingStrategy:
    """A power flow solution at the initial dispatch of the case.

    The Newton power flow starts from the voltages in the case file and, should
    it fail, from a flat start. If neither converges the case voltages are used
    as they are.

    Args:
        net: The network.
        adm: Its admittance structures, built when not given.
    """

    adm = adm or build_admittance(net)
    gen_matrix = net.gen_incidence()
    pg = np.clip(net.array('generators', 'p_init'), net.array('generators', 'p_min'),
                 net.array('generators', 'p_max'))
    qg = np.clip(net.array('generators', 'q_init'), net.array('generators', 'q_min'),
                 net.array('generators', 'q_max'))
    v_set = net.array('buses', 'v_init')
    for gen in net.generators:
        v_set[net.bus_index[gen.bus]] = gen.v_set
    p_net, q_net = net.net_load()
    ctx = DispatchContext(
        p=gen_matrix @ pg - p_net, q=gen_matrix @ qg - q_net, v_set=v_set,
        ref=net.ref, pv=net.pv, pq=net.pq,
    )
    case_state = SystemState(theta=net.array('buses', 'theta_init'), v=v_set.copy())
    state = case_state
    for init in (case_state, SystemState.flat(net.n_bus)):
        try:
            state = solve_newton(ctx, adm, init)
            break
        except (PowerFlowDivergence, SingularJacobianError) as exc:
            LOGGER.warning('Power flow for the starting point failed: %s', exc)
    v_min, v_max = net.array('buses', 'v_min'), net.array('buses', 'v_max')
    zeros = np.zeros(net.n_gen)
    return OperatingStrategy(
        theta=state.theta - state.theta[net.ref], v=np.clip(state.v, v_min, v_max),
        pg=pg, qg=qg, alpha=zeros, r_up=zeros, r_dn=zeros, method='deterministic',
    )


def solve_problem(
        problem: NlpProblem, x0: np.ndarray, duals: Dict[str, np.ndarray] = None,
) -> IpmResult:
    """Run the interior-point method and turn a failure into a verdict.

    When the method doesn't converge the restoration phase looks for the
    smallest relaxation of the linear rows. A relaxation above
    RESTORATION_TOL means the constraints can't be met.

    Raises:
        InfeasibleProblem: when the restoration phase needs a relaxation.
        SolverFailure: when the constraints can be met but the method still
            didn't converge.
    """

    result = solve_ipm(problem, x0, duals=duals)
    if result.converged:
        return result
    LOGGER.warning('Interior-point method stopped: %s, starting the restoration phase', result.message)
    slack = restore_feasibility(problem, x0)
    report = {'message': result.message, 'iterations': result.iterations, 'residuals': result.residuals}
    if slack > RESTORATION_TOL:
        raise InfeasibleProblem(
            f'the constraints need a relaxation of {slack:.3e} p.u. to admit a solution'
        )
    raise SolverFailure(f'interior-point method failed: {result.message}', report)


def solve_deterministic(
        net: Network,
        adm: AdmittanceSet = None,
        rm: ResponseMatrices = None,
        start: OperatingStrategy = None,
) -> Tuple[OperatingStrategy, IpmResult]:
    """Solve the deterministic AC-OPF.

    Args:
        net: The network.
        adm: Its admittance structures.
        rm: Response matrices, only the nominal flow map is used.
        start: Starting strategy; the power flow of initial_point by default.

    Returns:
        The strategy (α and reserves zero) and the solver result, whose
        true cost is problem.true_cost(result.x).
    """

    adm = adm or build_admittance(net)
    rm = rm or build_response(net, adm)
    problem = deterministic_problem(net, adm, rm)
    start = start or initial_point(net, adm)
    result = solve_problem(problem, problem.layout.pack(start))
    strategy = problem.layout.unpack(result.x, method='deterministic')
    LOGGER.info(
        'Deterministic OPF: %.2f $/h after %d iterations', problem.true_cost(result.x), result.iterations,
    )
    return strategy, result


def build_omega(net: Network, samples: Optional[SampleSet], settings: OpfSettings) -> OmegaSamples:
    """Samples, support and radius of ω, or a single zero sample without wind"""

    if samples is None or net.n_wind == 0:
        return OmegaSamples(values=np.zeros(1), lower=0.0, upper=0.0, epsilon=0.0)
    return OmegaSamples.from_samples(
        samples, beta=settings.beta, sigma_max=settings.sigma_max, fallback=settings.fallback,
    )


def _nominal_set(quantity: MonitoredQuantity) -> UncertaintySet:
    """The single-vertex set at zero error, used when there is no wind"""

    dim = quantity.dim
    return UncertaintySet(vertices=np.zeros((1, dim)), sigma=0.0, mean=np.zeros(dim), sqrt_cov=np.eye(dim))


# pylint: disable=too-many-locals
def prepare(
        net: Network,
        samples: Optional[SampleSet],
        settings: OpfSettings,
        adm: AdmittanceSet = None,
        sizer: Sizer = None,
        rm: ResponseMatrices = None,
        start: OperatingStrategy = None,
        kinds: Sequence[str] = KINDS,
) -> SolveContext:
    """Build everything the enforcement loop needs: response matrices, the
    deterministic starting point, the ω samples and the uncertainty set of
    every monitored quantity.

    Args:
        net: The network.
        samples: Forecast errors, one column per wind farm. None when the case
            has no wind.
        settings: The computation settings.
        adm: Admittance structures, built when not given.
        sizer: How to size one uncertainty set; Wasserstein hypercubes by default.
        rm: Response matrices to use instead of those of settings.linearization.
        start: Starting strategy instead of the deterministic AC-OPF.
        kinds: Families of monitored quantities, before settings.relax applies.

    Raises:
        AmbiguityError: when the samples don't match the wind farms.
        InfeasibleProblem: when a hypercube can't be sized.
    """

    timings = {}
    stage = time.perf_counter()
    adm = adm or build_admittance(net)
    if samples is not None and net.n_wind and samples.dim != net.n_wind:
        raise AmbiguityError(f'samples have {samples.dim} columns, the case has {net.n_wind} wind farms')

    if start is None:
        lpf = build_response(net, adm)
        start, _ = solve_deterministic(net, adm, lpf)
        if rm is None and settings.linearization == 'lpf':
            rm = lpf
    timings['deterministic'] = time.perf_counter() - stage
    if rm is None:
        rm = build_response(
            net, adm, linearization=settings.linearization,
            state=SystemState(theta=start.theta, v=start.v),
        )

    kinds = [kind for kind in kinds if kind not in settings.relax]
    quantities = [reserve_quantity(net)] + monitored_quantities(net, rm, kinds)
    constraints = RobustConstraintSet(quantities={quantity.qid: quantity for quantity in quantities})
    sigma = {}
    stage = time.perf_counter()
    omega = build_omega(net, samples, settings)
    if samples is None or net.n_wind == 0:
        constraints.sets = {quantity.qid: _nominal_set(quantity) for quantity in quantities}
    else:
        cache = UncertaintyCache(settings.cache_path) if settings.cache_path else None
        sizer = sizer or wasserstein_sizer(settings.beta, settings.sigma_max, settings.fallback)
        try:
            sized = size_quantities(
                quantities, samples, settings.rho, sizer=sizer, cache=cache, jobs=settings.jobs,
                namespace=settings.method,
            )
        except HypercubeInfeasible as exc:
            raise InfeasibleProblem(str(exc)) from exc
        constraints.sets = {qid: uset for qid, (_, uset) in sized.items()}
        sigma = {qid: result.sigma for qid, (result, _) in sized.items()}
    timings['sizing'] = time.perf_counter() - stage
    LOGGER.info(
        'Prepared %d monitored quantities, ω in [%.4f, %.4f] with radius %.4g',
        len(quantities), omega.lower, omega.upper, omega.epsilon,
    )
    return SolveContext(
        net=net, adm=adm, rm=rm, omega=omega, constraints=constraints,
        start=start, sigma=sigma, timings=timings,
    )


def stochastic_start(ctx: SolveContext, layout: VariableLayout) -> np.ndarray:
    """The deterministic solution with α spread evenly over the units with
    headroom, small reserves and a multiplier large enough for both cost rows.
    """

    net = ctx.net
    headroom = np.array([not gen.degenerate for gen in net.generators], dtype=float)
    if not headroom.any():
        raise InfeasibleProblem('no generator has room to take part in regulation')
    alpha = headroom / headroom.sum()
    costs = np.array([gen.cost for gen in net.generators], dtype=float).reshape(-1, 3)
    c2 = float(np.sum(costs[:, 0] * alpha * alpha))
    c1 = float(np.sum(2.0 * costs[:, 0] * ctx.start.pg * alpha + costs[:, 1] * alpha))
    reach = max(abs(ctx.omega.lower), abs(ctx.omega.upper))
    reserve = np.full(net.n_gen, INITIAL_RESERVE) * headroom
    strategy = OperatingStrategy(
        theta=ctx.start.theta, v=ctx.start.v, pg=ctx.start.pg, qg=ctx.start.qg,
        alpha=alpha, r_up=reserve, r_dn=reserve, lam=max(abs(c1) + 2.0 * c2 * reach, 1.0),
    )
    return layout.pack(strategy)


def violated_quantities(
        ctx: SolveContext, layout: VariableLayout, x: np.ndarray, qids: Sequence[str], tol: float,
) -> List[str]:
    """The quantities among qids whose robust rows are violated by more than tol at x"""

    rows: List[RobustRow] = []
    for qid in qids:
        rows.extend(emit_robust_constraints(ctx.constraints.quantities[qid], ctx.constraints.sets[qid]))
    excess = row_violations(layout, ctx.rm, rows, x)
    violated = []
    for row, amount in zip(rows, excess):
        if amount > tol and row.qid not in violated:
            violated.append(row.qid)
    return violated


# pylint: disable=too-many-arguments
def finish(
        ctx: SolveContext,
        problem: NlpProblem,
        result: IpmResult,
        report: EnforcementReport,
        method: str,
        omega: OmegaSamples = None,
) -> OperatingStrategy:
    """Read the strategy out of the final solve and complete the report.

    Args:
        ctx: The prepared inputs.
        problem: The final problem.
        result: Its solution.
        report: The report to fill in.
        method: Tag of the strategy.
        omega: The ω samples the objective is reported for; those of ctx by
            default.
    """

    strategy = problem.layout.unpack(result.x, method=method)
    for problem_text in strategy.violations(ctx.net):
        LOGGER.warning('Strategy invariant does not hold: %s', problem_text)
    omega = omega or ctx.omega
    report.objective = objective_report(cost_coeffs(ctx.net, strategy), omega)
    report.residuals = dict(result.residuals)
    mismatch, _ = problem.equalities(result.x)
    report.mismatch = float(np.max(np.abs(mismatch))) if mismatch.size else 0.0
    report.exact_flows = branch_flows(state_of(problem, result.x), ctx.adm)
    report.sigma = dict(ctx.sigma)
    report.timings.update(ctx.timings)
    LOGGER.info(
        '%s strategy: bound %.2f $/h, exact %.2f $/h, sample average %.2f $/h after %d rounds',
        method.upper(), report.objective.bound, report.objective.exact,
        report.objective.sample_average, report.rounds,
    )
    return strategy


def enforce(ctx: SolveContext, settings: OpfSettings) -> Tuple[OperatingStrategy, EnforcementReport]:
    """Run the outer loop on a prepared context.

    Raises:
        InfeasibleProblem: when a round can't be solved because its
            constraints can't be met.
        SolverFailure: when the interior-point method fails otherwise.
        EnforcementLimit: when quantities are still violated after
            settings.max_rounds rounds.
    """

    constraints = ctx.constraints
    constraints.enforce(['reserve'])
    if settings.enforce_all:
        constraints.enforce(constraints.candidates())
    report = EnforcementReport(method=settings.method)
    problem = ctx.assemble(constraints.rows())
    x = stochastic_start(ctx, problem.layout)
    duals = None
    start = time.perf_counter()
    while True:
        report.rounds += 1
        result = solve_problem(problem, x, duals)
        x, duals = result.x, result.duals()
        report.iterations.append(result.iterations)
        violated = violated_quantities(
            ctx, problem.layout, x, constraints.candidates(), settings.violation_tol,
        )
        LOGGER.info(
            'Enforcement round %d: %d quantities enforced, %d violated, %d iterations',
            report.rounds, len(constraints.enforced), len(violated), result.iterations,
        )
        if not violated:
            break
        if report.rounds >= settings.max_rounds:
            raise EnforcementLimit(report.rounds, violated)
        constraints.enforce(violated)
        problem = ctx.assemble(constraints.rows())
    report.timings['enforcement'] = time.perf_counter() - start
    report.enforced = list(constraints.enforced)
    return finish(ctx, problem, result, report, settings.method), report


def solve_with_enforcement(
        net: Network,
        samples: Optional[SampleSet],
        settings: OpfSettings = None,
        adm: AdmittanceSet = None,
) -> Tuple[OperatingStrategy, EnforcementReport]:
    """Compute the distributionally robust strategy of a network.

    Args:
        net: The network.
        samples: Historical forecast errors, one column per wind farm, or None
            for a case without wind.
        settings: The computation settings, defaults when not given.
        adm: Admittance structures, built when not given.

    Raises:
        InfeasibleProblem: when the chance constraints can't be met.
        SolverFailure: when the solver fails for another reason.
        AmbiguityError: when the samples can't be used.
    """

    settings = settings or OpfSettings()
    ctx = prepare(net, samples, settings, adm)
    return enforce(ctx, settings)
