"""
This module maps sized hypercubes back to the original coordinates and writes
out the linear constraints their vertices imply.

Every monitored quantity responds to the wind forecast error ζ as

    nominal_i(x) + ω·(A_i C_g α) + t,    ω = 1ᵀζ,  t = B_i ζ

so its chance constraint only depends on the 2-D random vector (ω, t). The
reserve constraints only depend on ω. Requiring the constraint at every vertex
of the uncertainty set U makes it hold on all of U, because the response is
affine in (ω, t).

Quantities are named `reserve`, `voltage:<bus>`, `reactive:<bus>` and
`flow:<from>-<to>#<k>`, with bus ids as in the case file and k the position of
the branch.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, Iterable, List, Tuple

import numpy as np

from wdro_opf.case_io import Network
from wdro_opf.chance.hypercube import HypercubeResult
from wdro_opf.linresponse import ResponseMatrices
from wdro_opf.wasserstein.sample_set import hypercube_vertices


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

KINDS = ('voltage', 'reactive', 'flow')


@dataclass(frozen=True, eq=False)
class MonitoredQuantity:  # pylint: disable=too-many-instance-attributes
    """One quantity under a chance constraint.

    Attributes:
        qid: The quantity identifier.
        kind: 'reserve', 'voltage', 'reactive' or 'flow'.
        index: Bus position for voltages, bus position for reactive output,
            branch position for flows, unused for the reserve.
        alpha_row: Response to ω per unit of each generator's α (A_i C_g).
        direct_row: Direct response to ζ, one entry per wind farm (B_i).
        lower: Lower limit of the quantity.
        upper: Upper limit of the quantity.
        units: Generators whose reactive output sums to the quantity.
    """

    qid: str
    kind: str
    index: int
    alpha_row: np.ndarray
    direct_row: np.ndarray
    lower: float
    upper: float
    units: Tuple[int, ...] = ()

    @property
    def projection(self) -> np.ndarray:
        """The weights mapping ζ to (ω, t), or to ω alone for the reserve"""

        ones = np.ones(len(self.direct_row))
        if self.kind == 'reserve':
            return ones[None, :]
        return np.vstack([ones, self.direct_row])

    @property
    def dim(self) -> int:
        """Dimension of the projected random vector"""

        return 1 if self.kind == 'reserve' else 2


def reserve_quantity(net: Network) -> MonitoredQuantity:
    """The system reserve constraint, driven by the total error ω alone"""

    return MonitoredQuantity(
        qid='reserve', kind='reserve', index=-1,
        alpha_row=np.zeros(net.n_gen), direct_row=np.ones(net.n_wind),
        lower=-math.inf, upper=0.0,
    )


def monitored_quantities(
        net: Network, rm: ResponseMatrices, kinds: Iterable[str] = KINDS,
) -> List[MonitoredQuantity]:
    """Every voltage, reactive and flow quantity that has a chance constraint.

    Args:
        net: The network.
        rm: Its response matrices.
        kinds: Which families to include.
    """

    kinds = set(kinds)
    unknown = kinds - set(KINDS)
    if unknown:
        raise ValueError(f'unknown quantity kinds {sorted(unknown)}')
    quantities = []
    partition = rm.partition
    if 'voltage' in kinds:
        av = rm.alpha_coefficients('v')
        for row, bus in enumerate(partition.pq):
            quantities.append(MonitoredQuantity(
                qid=f'voltage:{net.buses[bus].bus_id}', kind='voltage', index=bus,
                alpha_row=av[row], direct_row=rm.bv[row],
                lower=net.buses[bus].v_min, upper=net.buses[bus].v_max,
            ))
    if 'reactive' in kinds:
        aq = rm.alpha_coefficients('q')
        q_min = net.array('generators', 'q_min')
        q_max = net.array('generators', 'q_max')
        for row, bus in enumerate(partition.regulated):
            units = tuple(int(unit) for unit in np.flatnonzero(net.gen_bus == bus))
            quantities.append(MonitoredQuantity(
                qid=f'reactive:{net.buses[bus].bus_id}', kind='reactive', index=bus,
                alpha_row=aq[row], direct_row=rm.bq[row],
                lower=float(q_min[list(units)].sum()), upper=float(q_max[list(units)].sum()),
                units=units,
            ))
    if 'flow' in kinds:
        af = rm.alpha_coefficients('f')
        for k, branch in enumerate(net.branches):
            if not branch.enforced:
                continue
            quantities.append(MonitoredQuantity(
                qid=f'flow:{branch.from_bus}-{branch.to_bus}#{k}', kind='flow', index=k,
                alpha_row=af[k], direct_row=rm.bf[k],
                lower=-branch.rate, upper=branch.rate,
            ))
    return quantities


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """The polytope U = Σ̂^{1/2} V(σ) + μ̂, kept as its list of vertices.

    Attributes:
        vertices: 2^m rows of m coordinates, (ω, t) or (ω,).
        sigma: Half side of the standardized cube.
        mean: μ̂.
        sqrt_cov: Σ̂^{1/2}.
    """

    vertices: np.ndarray
    sigma: float
    mean: np.ndarray
    sqrt_cov: np.ndarray

    def interval(self, weights: np.ndarray) -> Tuple[float, float]:
        """The range of weights·u over the set"""

        values = self.vertices @ np.asarray(weights, dtype=float)
        return float(values.min()), float(values.max())


def build_uncertainty_set(result: HypercubeResult, mean: np.ndarray, sqrt_cov: np.ndarray) -> UncertaintySet:
    """Map the standardized cube of half side result.sigma to original coordinates.

    Args:
        result: The sized hypercube.
        mean: Sample mean of the projected samples.
        sqrt_cov: Principal square root of their covariance.
    """

    if not math.isfinite(result.sigma):
        raise ValueError(f'hypercube side must be finite, got {result.sigma}')
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    sqrt_cov = np.atleast_2d(np.asarray(sqrt_cov, dtype=float))
    return UncertaintySet(
        vertices=hypercube_vertices(result.sigma, mean, sqrt_cov),
        sigma=result.sigma, mean=mean, sqrt_cov=sqrt_cov,
    )


@dataclass(frozen=True, eq=False)
class RobustRow:
    """One linear constraint lower ≤ nominal(x) + alpha_coeff·α + offset ≤ upper.

    The nominal expression is chosen by kind and index: the PQ voltage v_i, the
    summed reactive output of the units at a regulated bus, the linear nominal
    flow of a branch, or −r̲_i (`reserve_dn`) and −r̄_i (`reserve_up`) of one unit.

    Attributes:
        qid: The quantity the row belongs to.
        kind: Selects the nominal expression.
        index: Bus, branch or generator position.
        alpha_coeff: Coefficient on every generator's α.
        offset: The constant part contributed by the vertex.
        lower: Lower bound, -inf when one-sided.
        upper: Upper bound, +inf when one-sided.
        units: Generators summed by a reactive row.
    """

    qid: str
    kind: str
    index: int
    alpha_coeff: np.ndarray
    offset: float
    lower: float
    upper: float
    units: Tuple[int, ...] = ()


def emit_robust_constraints(quantity: MonitoredQuantity, uset: UncertaintySet) -> List[RobustRow]:
    """Write the constraint of every vertex of uset.

    For the reserve each vertex ω_v asks ω_v·α ≤ r̲ and −ω_v·α ≤ r̄ for every
    unit. For the other quantities each vertex (ω_v, t_v) asks
    lower ≤ nominal + ω_v·(A_i C_g α) + t_v ≤ upper.

    Args:
        quantity: The monitored quantity.
        uset: Its uncertainty set.
    """

    rows = []
    if quantity.kind == 'reserve':
        n_gen = len(quantity.alpha_row)
        for vertex in uset.vertices:
            omega = float(vertex[0])
            for unit in range(n_gen):
                coeff = np.zeros(n_gen)
                coeff[unit] = omega
                rows.append(RobustRow(quantity.qid, 'reserve_dn', unit, coeff, 0.0, -math.inf, 0.0))
                rows.append(RobustRow(quantity.qid, 'reserve_up', unit, -coeff, 0.0, -math.inf, 0.0))
        return rows

    for vertex in uset.vertices:
        omega, t_value = float(vertex[0]), float(vertex[1])
        rows.append(RobustRow(
            qid=quantity.qid, kind=quantity.kind, index=quantity.index,
            alpha_coeff=omega * np.asarray(quantity.alpha_row, dtype=float), offset=t_value,
            lower=quantity.lower, upper=quantity.upper, units=quantity.units,
        ))
    return rows


@dataclass
class RobustConstraintSet:
    """The quantities, their uncertainty sets and the rows currently enforced.

    Attributes:
        quantities: Every monitored quantity by id.
        sets: The uncertainty set of every sized quantity by id.
        enforced: Ids whose rows go into the optimization problem.
        extra_rows: Rows added outside the vertex scheme (cutting planes).
    """

    quantities: Dict[str, MonitoredQuantity] = field(default_factory=dict)
    sets: Dict[str, UncertaintySet] = field(default_factory=dict)
    enforced: List[str] = field(default_factory=list)
    extra_rows: Dict[str, List[RobustRow]] = field(default_factory=dict)

    def enforce(self, qids: Iterable[str]) -> List[str]:
        """Add quantities to the enforced list, returning the ones that are new"""

        added = [qid for qid in qids if qid not in self.enforced]
        self.enforced.extend(added)
        return added

    def rows(self) -> List[RobustRow]:
        """All rows of the enforced quantities"""

        rows = []
        for qid in self.enforced:
            if qid in self.sets:
                rows.extend(emit_robust_constraints(self.quantities[qid], self.sets[qid]))
            rows.extend(self.extra_rows.get(qid, []))
        return rows

    def candidates(self) -> List[str]:
        """Ids that could be enforced but are not yet"""

        return [qid for qid in self.quantities if qid not in self.enforced]
