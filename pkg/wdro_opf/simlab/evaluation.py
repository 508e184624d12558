"""
This module runs the out-of-sample Monte Carlo evaluation of an operating
strategy. Every trial applies one forecast error ζ, lets AGC deploy
−(1ᵀζ)α_i on each unit and AVR hold the regulated voltages, and checks

  - the reserve of every unit, −r̲_i ≤ −(1ᵀζ)α_i ≤ r̄_i,
  - the voltage of every PQ bus,
  - the summed reactive output of every regulated bus,
  - the active flow of every branch with a rating,

against their limits. The response comes from one of four models:

  full-ac   the exact AC power flow after the AGC/AVR response
  approx    the exact AC nominal point plus the linear response deviations
  lpf       the linear power flow nominal point plus the same deviations
  dc        PTDF flows around the DC nominal point (reserve and flows only)

A trial's cost is Σ f_i(p_i) at the realized outputs plus the reserve cost.
Trials whose AC power flow diverges are counted and left out of every
statistic. Trials are processed in chunks, in parallel when asked; the
reducer sums counts and takes the cost mean with an exactly rounded sum, so the
report doesn't depend on how trials were split.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import time
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from wdro_opf.acgrid import (
    PowerFlowDivergence, SingularJacobianError, SystemState, agc_avr_response, branch_flows,
)
from wdro_opf.case_io import AdmittanceSet, Network, build_admittance
from wdro_opf.linresponse import Partition, build_response, lpf_solve
from wdro_opf.opfcore import SolverFailure
from wdro_opf.opfcore.strategy import OperatingStrategy
from wdro_opf.wasserstein import SampleSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

MODELS = ('full-ac', 'approx', 'lpf', 'dc')
CHUNK_SIZE = 20000
AC_CHUNK_SIZE = 250
HISTOGRAM_BINS = 50
HISTOGRAM_MARGIN = 0.25
SPAN_FLOOR = 1e-6
UNLIMITED_SPAN = 10.0
CHECK_TOL = 1e-6
HISTOGRAM_KINDS = ('voltage', 'reactive', 'flow')


@dataclass(frozen=True)
class ConstraintInfo:
    """One checked constraint, with limits in p.u."""

    cid: str
    kind: str
    lower: float
    upper: float

    def edges(self, bins: int = HISTOGRAM_BINS) -> np.ndarray:
        """Histogram bin edges spanning the limits plus a margin on each side"""

        # an unlimited side is drawn at UNLIMITED_SPAN p.u.
        lower = max(self.lower, -UNLIMITED_SPAN)
        upper = min(self.upper, UNLIMITED_SPAN)
        span = max(upper - lower, SPAN_FLOOR)
        return np.linspace(lower - HISTOGRAM_MARGIN * span, upper + HISTOGRAM_MARGIN * span, bins + 1)


def _constraint_list(
        net: Network,
        strategy: OperatingStrategy,
        pq: np.ndarray,
        regulated: Sequence[Tuple[int, Tuple[int, ...]]],
        branches: np.ndarray,
) -> List[ConstraintInfo]:
    constraints = [
        ConstraintInfo(f'reserve:{gen.bus}#{i}', 'reserve', -float(strategy.r_dn[i]), float(strategy.r_up[i]))
        for i, gen in enumerate(net.generators)
    ]
    constraints += [
        ConstraintInfo(f'voltage:{net.buses[bus].bus_id}', 'voltage', net.buses[bus].v_min, net.buses[bus].v_max)
        for bus in pq
    ]
    q_min = net.array('generators', 'q_min')
    q_max = net.array('generators', 'q_max')
    for bus, units in regulated:
        constraints.append(ConstraintInfo(
            f'reactive:{net.buses[bus].bus_id}', 'reactive',
            float(q_min[list(units)].sum()), float(q_max[list(units)].sum()),
        ))
    for k in branches:
        branch = net.branches[k]
        limit = branch.rate if branch.enforced else math.inf
        constraints.append(ConstraintInfo(
            f'flow:{branch.from_bus}-{branch.to_bus}#{k}', 'flow', -limit, limit,
        ))
    return constraints


def _lpf_nominal(net: Network, adm: AdmittanceSet, partition: Partition, strategy: OperatingStrategy):
    gen_matrix = net.gen_incidence()
    p_net, q_net = net.net_load()
    theta, v = lpf_solve(
        adm, partition, gen_matrix @ strategy.pg - p_net, gen_matrix @ strategy.qg - q_net, strategy.v,
    )
    # [p; q] = −K [θ; v] with K = [[B′, −G], [G, B]]
    p_inj = -(adm.b_prime @ theta - adm.g @ v)
    q_inj = -(adm.g @ theta + adm.b @ v)
    q_bus = gen_matrix @ strategy.qg
    q_bus[partition.regulated] = q_inj[partition.regulated] + q_net[partition.regulated]
    pg = strategy.pg.copy()
    ref_units = np.flatnonzero(net.gen_bus == net.ref)
    pg[ref_units[0]] = p_inj[net.ref] + p_net[net.ref] - pg[ref_units[1:]].sum()
    return theta, v, q_bus, pg


@dataclass(frozen=True, eq=False)
class ModelEvaluator:  # pylint: disable=too-many-instance-attributes
    """Everything a worker needs to evaluate trials of one strategy under one
    model. Linear models keep a nominal value and the deviation per unit of
    ω = 1ᵀζ and per unit of ζ for every checked quantity; the full AC model
    keeps the network and solves each trial.
    """

    net: Network
    adm: AdmittanceSet
    strategy: OperatingStrategy
    model: str
    constraints: Tuple[ConstraintInfo, ...]
    nominal: np.ndarray
    omega_gain: np.ndarray
    zeta_gain: np.ndarray
    nominal_pg: np.ndarray
    checked_pq: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    checked_regulated: Tuple[Tuple[int, Tuple[int, ...]], ...] = ()
    checked_branches: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    # pylint: disable=too-many-locals
    @classmethod
    def build(
            cls,
            net: Network,
            strategy: OperatingStrategy,
            model: str,
            adm: AdmittanceSet = None,
            branches: Sequence[int] = None,
    ) -> 'ModelEvaluator':
        """Prepare the evaluation of a strategy.

        Args:
            net: The network the strategy was computed for.
            strategy: The operating strategy.
            model: One of MODELS.
            adm: Admittance structures, built when not given.
            branches: Positions of the branches whose flow is checked, every
                branch with a rating when not given.

        Raises:
            ValueError: when the model is unknown or the strategy doesn't fit
                the network.
        """

        if model not in MODELS:
            raise ValueError(f'unknown model "{model}", expected one of {", ".join(MODELS)}')
        if len(strategy.pg) != net.n_gen or len(strategy.v) != net.n_bus:
            raise ValueError(
                f'strategy has {len(strategy.pg)} generators and {len(strategy.v)} buses, '
                f'the case has {net.n_gen} and {net.n_bus}'
            )
        adm = adm or build_admittance(net)
        partition = Partition.from_network(net)
        if branches is None:
            branches = [k for k, branch in enumerate(net.branches) if branch.enforced]
        branches = np.asarray(branches, dtype=int)
        if model == 'dc':
            pq, regulated = np.zeros(0, dtype=int), ()
        else:
            pq = np.array(partition.pq, dtype=int)
            regulated = tuple(
                (bus, tuple(int(unit) for unit in np.flatnonzero(net.gen_bus == bus)))
                for bus in partition.regulated
            )

        n_gen = net.n_gen
        no_direct = np.zeros((n_gen, net.n_wind))
        pg = strategy.pg.copy()
        if model == 'dc':
            # the benchmark package builds on the OPF core, import it late
            from wdro_opf.rivals.dc import dc_response  # pylint: disable=import-outside-toplevel
            rm = dc_response(net)
            p_net, _ = net.net_load()
            flows = -rm.af @ (rm.gen_matrix @ strategy.pg - p_net)
            alpha_bus = rm.gen_matrix @ strategy.alpha
            nominal = np.concatenate([np.zeros(n_gen), flows[branches]])
            omega_gain = np.concatenate([-strategy.alpha, (rm.af @ alpha_bus)[branches]])
            zeta_gain = np.vstack([no_direct, rm.bf[branches]])
        else:
            rm = build_response(net, adm, partition)
            if model == 'lpf':
                theta, v, q_bus, pg = _lpf_nominal(net, adm, partition, strategy)
                flows = rm.nominal_flows(theta, v)
            else:
                v = strategy.v
                q_bus = rm.gen_matrix @ strategy.qg
                flows = branch_flows(SystemState(theta=strategy.theta, v=v), adm)
            alpha_bus = rm.gen_matrix @ strategy.alpha
            nominal = np.concatenate([np.zeros(n_gen), v[pq], q_bus[partition.regulated], flows[branches]])
            omega_gain = np.concatenate([
                -strategy.alpha, rm.av @ alpha_bus, rm.aq @ alpha_bus, (rm.af @ alpha_bus)[branches],
            ])
            zeta_gain = np.vstack([no_direct, rm.bv, rm.bq, rm.bf[branches]])
        return cls(
            net=net, adm=adm, strategy=strategy, model=model,
            constraints=tuple(_constraint_list(net, strategy, pq, regulated, branches)),
            nominal=nominal, omega_gain=omega_gain, zeta_gain=zeta_gain, nominal_pg=pg,
            checked_pq=pq, checked_regulated=regulated, checked_branches=branches,
        )

    @property
    def lower(self) -> np.ndarray:
        """Lower limit of every constraint"""

        return np.array([info.lower for info in self.constraints])

    @property
    def upper(self) -> np.ndarray:
        """Upper limit of every constraint"""

        return np.array([info.upper for info in self.constraints])

    def positions(self, kind: str) -> np.ndarray:
        """Where the constraints of one kind sit in a row of values"""

        return np.array([j for j, info in enumerate(self.constraints) if info.kind == kind], dtype=int)

    def reserve_cost(self) -> float:
        """Cost of the procured reserves"""

        return float(
            self.net.array('generators', 'reserve_up_price') @ self.strategy.r_up
            + self.net.array('generators', 'reserve_down_price') @ self.strategy.r_dn
        )

    def generation_cost(self, pg: np.ndarray) -> np.ndarray:
        """Total generation cost of each row of outputs"""

        costs = np.array([gen.cost for gen in self.net.generators], dtype=float).reshape(-1, 3)
        pg = np.atleast_2d(pg)
        return (pg * pg) @ costs[:, 0] + pg @ costs[:, 1] + costs[:, 2].sum()

    def linear_values(self, zetas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Constraint values and realized outputs of a batch of errors under a
        linear model, one row per trial.
        """

        omega = zetas.sum(axis=1)
        values = self.nominal[None, :] + omega[:, None] * self.omega_gain[None, :] + zetas @ self.zeta_gain.T
        pg = self.nominal_pg[None, :] - omega[:, None] * self.strategy.alpha[None, :]
        return values, pg

    def ac_values(self, zeta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Constraint values and realized outputs of one trial under the exact
        AC response.

        Raises:
            PowerFlowDivergence: when the power flow doesn't converge.
        """

        response = agc_avr_response(self.net, self.adm, self.strategy, zeta)
        omega = float(zeta.sum()) if zeta.size else 0.0
        q_reg = np.array([response.qg[list(units)].sum() for _, units in self.checked_regulated])
        values = np.concatenate([
            -omega * self.strategy.alpha,
            response.state.v[self.checked_pq],
            q_reg,
            response.flows[self.checked_branches],
        ])
        return values, response.pg

    def values(self, zetas: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[str]]:
        """Evaluate a batch of trials under the evaluator's model.

        Returns:
            Constraint values and realized outputs of the converged trials,
            the mask of converged trials and the messages of the failed ones.
        """

        if self.model != 'full-ac':
            values, pg = self.linear_values(zetas)
            return values, pg, np.ones(len(zetas), dtype=bool), []
        rows, outputs, failures = [], [], []
        converged = np.zeros(len(zetas), dtype=bool)
        for trial, zeta in enumerate(zetas):
            try:
                values, pg = self.ac_values(zeta)
            except (PowerFlowDivergence, SingularJacobianError) as exc:
                failures.append(str(exc))
                continue
            converged[trial] = True
            rows.append(values)
            outputs.append(pg)
        values = np.array(rows, dtype=float).reshape(-1, len(self.constraints))
        pg = np.array(outputs, dtype=float).reshape(-1, self.net.n_gen)
        return values, pg, converged, failures


@dataclass
class ChunkTally:
    """Sums over one chunk of trials"""

    satisfied: np.ndarray
    costs: np.ndarray
    histograms: np.ndarray
    usage: np.ndarray
    failures: List[str]


def _evaluate_chunk(
        evaluator: ModelEvaluator, zetas: np.ndarray, edges: np.ndarray, usage_edges: np.ndarray,
) -> ChunkTally:
    values, pg, converged, failures = evaluator.values(zetas)
    lower, upper = evaluator.lower, evaluator.upper
    satisfied = np.count_nonzero(
        (values >= lower[None, :] - CHECK_TOL) & (values <= upper[None, :] + CHECK_TOL), axis=0,
    )
    costs = evaluator.generation_cost(pg) + evaluator.reserve_cost() if len(pg) else np.zeros(0)
    histograms = np.zeros((values.shape[1], HISTOGRAM_BINS), dtype=np.int64)
    for j in range(values.shape[1]):
        histograms[j] = np.histogram(values[:, j], bins=edges[j])[0]
    # AGC deploys the total error with the opposite sign
    usage = np.histogram(-zetas[converged].sum(axis=1), bins=usage_edges)[0]
    return ChunkTally(satisfied=satisfied, costs=costs, histograms=histograms, usage=usage, failures=failures)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Counts over fixed bins, in the quantity's reporting units"""

    name: str
    edges: np.ndarray
    counts: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        """The histogram as plotting-ready columns"""

        return pd.DataFrame({
            'bin_low': self.edges[:-1], 'bin_high': self.edges[1:], 'count': self.counts,
        })


@dataclass(frozen=True, eq=False)
class EvaluationReport:  # pylint: disable=too-many-instance-attributes
    """What the Monte Carlo evaluation of one strategy found.

    Attributes:
        model: The response model of the trials.
        method: The method the strategy came from.
        n_trials: Number of trials run.
        failed: Trials whose power flow didn't converge.
        constraints: Every checked constraint.
        reliabilities: Share of the converged trials satisfying each constraint.
        mean_cost: Mean realized cost of the converged trials ($/h).
        cost_std: Standard deviation of the realized cost ($/h).
        reserve_usage: Distribution of the total deployed reserve (MW).
        histograms: Distribution of the least reliable voltage, reactive and
            flow constraint, keyed by kind.
        elapsed: Wall time of the evaluation (s).
    """

    model: str
    method: str
    n_trials: int
    failed: int
    constraints: Tuple[ConstraintInfo, ...]
    reliabilities: np.ndarray
    mean_cost: float
    cost_std: float
    reserve_usage: Histogram
    histograms: Dict[str, Histogram] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def lowest(self) -> Tuple[str, float]:
        """The least reliable constraint and its reliability"""

        if not len(self.reliabilities):
            return '', 1.0
        worst = int(np.argmin(self.reliabilities))
        return self.constraints[worst].cid, float(self.reliabilities[worst])

    @property
    def standard_error(self) -> float:
        """Upper bound of the standard error of any reliability estimate"""

        converged = self.n_trials - self.failed
        return math.sqrt(0.25 / converged) if converged else math.inf

    def reliability_frame(self) -> pd.DataFrame:
        """One row per constraint with its kind, limits and reliability"""

        return pd.DataFrame({
            'constraint': [info.cid for info in self.constraints],
            'kind': [info.kind for info in self.constraints],
            'lower': [info.lower for info in self.constraints],
            'upper': [info.upper for info in self.constraints],
            'reliability': self.reliabilities,
        })

    def summary(self) -> Dict:
        """The headline numbers as a JSON-ready dict"""

        cid, reliability = self.lowest
        return {
            'model': self.model,
            'method': self.method,
            'trials': self.n_trials,
            'failed': self.failed,
            'mean_cost': self.mean_cost,
            'cost_std': self.cost_std,
            'lowest_reliability': reliability,
            'lowest_constraint': cid,
            'standard_error': self.standard_error,
            'elapsed': self.elapsed,
        }


def _chunks(n_trials: int, size: int) -> List[slice]:
    return [slice(start, min(start + size, n_trials)) for start in range(0, n_trials, size)]


def _reporting_scale(kind: str, base_mva: float) -> float:
    return 1.0 if kind == 'voltage' else base_mva


# pylint: disable=too-many-locals
def evaluate_strategy(
        net: Network,
        strategy: OperatingStrategy,
        samples: SampleSet,
        model: str = 'full-ac',
        jobs: int = 1,
        adm: AdmittanceSet = None,
        chunk_size: int = None,
) -> EvaluationReport:
    """Evaluate a strategy against out-of-sample forecast errors.

    Args:
        net: The network the strategy was computed for.
        strategy: The operating strategy.
        samples: Evaluation errors, one column per wind farm (p.u.).
        model: One of MODELS.
        jobs: Number of worker processes.
        adm: Admittance structures, built when not given.
        chunk_size: Trials per work item; a default per model when not given.

    Raises:
        ValueError: when the model is unknown or the inputs don't fit the network.
        SolverFailure: when not a single trial converged.
    """

    started = time.perf_counter()
    zetas = np.asarray(samples.data, dtype=float).reshape(samples.n_samples, -1)
    if zetas.shape[1] != net.n_wind:
        raise ValueError(f'samples have {zetas.shape[1]} columns, the case has {net.n_wind} wind farms')
    evaluator = ModelEvaluator.build(net, strategy, model, adm)
    edges = np.stack([info.edges() for info in evaluator.constraints]) \
        if evaluator.constraints else np.zeros((0, HISTOGRAM_BINS + 1))
    deployed = -zetas.sum(axis=1)
    low, high = float(deployed.min()), float(deployed.max())
    usage_edges = np.linspace(low, max(high, low + SPAN_FLOOR), HISTOGRAM_BINS + 1)

    chunk_size = chunk_size or (AC_CHUNK_SIZE if model == 'full-ac' else CHUNK_SIZE)
    pieces = _chunks(len(zetas), chunk_size)
    LOGGER.info(
        'Evaluating the %s strategy on %d trials with the %s model in %d chunks',
        strategy.method, len(zetas), model, len(pieces),
    )
    if jobs > 1 and len(pieces) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_evaluate_chunk, evaluator, zetas[piece], edges, usage_edges) for piece in pieces
            ]
            tallies = [future.result() for future in futures]
    else:
        tallies = [_evaluate_chunk(evaluator, zetas[piece], edges, usage_edges) for piece in pieces]

    failures = [message for tally in tallies for message in tally.failures]
    converged = len(zetas) - len(failures)
    if not converged:
        raise SolverFailure(
            f'all {len(zetas)} trials diverged, last: {failures[-1]}', report={'failed': len(failures)},
        )
    if failures:
        LOGGER.warning('%d of %d trials diverged and are left out, last: %s', len(failures), len(zetas), failures[-1])

    satisfied = np.sum([tally.satisfied for tally in tallies], axis=0)
    reliabilities = satisfied / converged
    costs = np.concatenate([tally.costs for tally in tallies])
    mean_cost = math.fsum(costs) / converged
    cost_std = math.sqrt(math.fsum((costs - mean_cost) ** 2) / converged)
    counts = np.sum([tally.histograms for tally in tallies], axis=0)
    usage = np.sum([tally.usage for tally in tallies], axis=0)

    base = net.base_mva
    histograms = {}
    for kind in HISTOGRAM_KINDS:
        members = evaluator.positions(kind)
        if not len(members):
            continue
        worst = int(members[np.argmin(reliabilities[members])])
        info = evaluator.constraints[worst]
        histograms[kind] = Histogram(
            name=info.cid, edges=edges[worst] * _reporting_scale(kind, base), counts=counts[worst],
        )
    report = EvaluationReport(
        model=model, method=strategy.method, n_trials=len(zetas), failed=len(failures),
        constraints=evaluator.constraints, reliabilities=reliabilities,
        mean_cost=mean_cost, cost_std=cost_std,
        reserve_usage=Histogram(name='reserve usage', edges=usage_edges * base, counts=usage),
        histograms=histograms, elapsed=time.perf_counter() - started,
    )
    cid, lowest = report.lowest
    LOGGER.info(
        'Mean cost %.2f $/h, lowest reliability %.5f (%s), %d failed trials, %.1f s',
        mean_cost, lowest, cid, len(failures), report.elapsed,
    )
    return report
