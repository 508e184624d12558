"""
This module contains the immutable network model. All electrical quantities are
stored in per-unit on the system MVA base and angles in radians. Generator cost
coefficients are stored for a per-unit output, so that c2 * p**2 + c1 * p + c0
gives $/h when p is in p.u.

Buses are identified by the integer ids used in the case file. Everything that
works with vectors uses the bus position (the order of `Network.buses`) instead,
`Network.bus_index` maps one to the other.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
import logging
import math
from typing import Dict, List, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from wdro_opf.case_io import CaseValidationError


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

REF_BUS_TYPE = 3


def to_per_unit(value: float, base_mva: float) -> float:
    """Convert a MW/MVAr quantity to per-unit"""

    return value / base_mva


def from_per_unit(value: float, base_mva: float) -> float:
    """Convert a per-unit quantity back to MW/MVAr"""

    return value * base_mva


def cost_to_per_unit(coeffs: Tuple[float, float, float], base_mva: float) -> Tuple[float, float, float]:
    """Rescale (c2, c1, c0) of a cost curve in MW to the same curve in p.u."""

    c2, c1, c0 = coeffs
    return (c2 * base_mva ** 2, c1 * base_mva, c0)


def cost_from_per_unit(coeffs: Tuple[float, float, float], base_mva: float) -> Tuple[float, float, float]:
    """Rescale (c2, c1, c0) of a cost curve in p.u. back to MW"""

    c2, c1, c0 = coeffs
    return (c2 / base_mva ** 2, c1 / base_mva, c0)


@dataclass(frozen=True)
class Bus:  # pylint: disable=too-many-instance-attributes
    """A network node with its load, shunt and voltage limits (all p.u.)"""

    bus_id: int
    bus_type: int
    p_load: float
    q_load: float
    g_shunt: float
    b_shunt: float
    v_min: float
    v_max: float
    v_init: float = 1.0
    theta_init: float = 0.0


@dataclass(frozen=True)
class Branch:  # pylint: disable=too-many-instance-attributes
    """A π-model line or transformer. A `rate` of 0 means the flow limit is not
    enforced. A `ratio` of 1 is a plain line.
    """

    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float
    rate: float = 0.0
    ratio: float = 1.0
    shift: float = 0.0
    in_service: bool = True

    @property
    def enforced(self) -> bool:
        """A flow limit exists for this branch"""

        return self.in_service and self.rate > 0


@dataclass(frozen=True)
class Generator:  # pylint: disable=too-many-instance-attributes
    """A dispatchable unit. `cost` is (c2, c1, c0) for an output in p.u. and the
    reserve prices are $/h per p.u. of upward and downward reserve.
    """

    bus: int
    p_min: float
    p_max: float
    q_min: float
    q_max: float
    cost: Tuple[float, float, float]
    reserve_up_price: float
    reserve_down_price: float
    p_init: float = 0.0
    q_init: float = 0.0
    v_set: float = 1.0

    def cost_at(self, p_out):
        """Evaluate the quadratic cost curve (works element-wise on arrays)"""

        c2, c1, c0 = self.cost
        return c2 * p_out * p_out + c1 * p_out + c0

    @property
    def degenerate(self) -> bool:
        """A unit with no room to move can't take part in regulation"""

        return self.p_max - self.p_min <= 0


@dataclass(frozen=True)
class WindFarm:
    """A wind farm injecting its forecast at a fixed power factor"""

    bus: int
    capacity: float
    forecast: float
    power_factor: float = 1.0

    @property
    def tan_phi(self) -> float:
        """The ratio of reactive to active injection, sin φ / cos φ"""

        return math.sqrt(max(1.0 - self.power_factor ** 2, 0.0)) / self.power_factor

    @property
    def q_forecast(self) -> float:
        """Nominal reactive injection at the fixed power factor"""

        return self.forecast * self.tan_phi


@dataclass(frozen=True)
class Network:
    """The validated network. Constructing one checks every invariant and raises
    a CaseValidationError naming the first one that fails.
    """

    base_mva: float
    buses: Tuple[Bus, ...]
    branches: Tuple[Branch, ...]
    generators: Tuple[Generator, ...]
    wind_farms: Tuple[WindFarm, ...] = field(default_factory=tuple)
    name: str = 'case'

    def __post_init__(self):
        _validate(self)

    @property
    def n_bus(self) -> int:
        """Number of buses"""

        return len(self.buses)

    @property
    def n_branch(self) -> int:
        """Number of branches (in service or not)"""

        return len(self.branches)

    @property
    def n_gen(self) -> int:
        """Number of generators"""

        return len(self.generators)

    @property
    def n_wind(self) -> int:
        """Number of wind farms"""

        return len(self.wind_farms)

    @cached_property
    def bus_index(self) -> Dict[int, int]:
        """Map a bus id to its position"""

        return {bus.bus_id: pos for pos, bus in enumerate(self.buses)}

    @cached_property
    def ref(self) -> int:
        """Position of the reference bus"""

        return [pos for pos, bus in enumerate(self.buses) if bus.bus_type == REF_BUS_TYPE][0]

    @cached_property
    def pv(self) -> List[int]:
        """Positions of the PV buses: every bus other than the reference that
        hosts at least one generator.
        """

        gen_buses = {self.bus_index[gen.bus] for gen in self.generators}
        return sorted(gen_buses - {self.ref})

    @cached_property
    def pq(self) -> List[int]:
        """Positions of the PQ buses"""

        taken = set(self.pv) | {self.ref}
        return [pos for pos in range(self.n_bus) if pos not in taken]

    @cached_property
    def gen_bus(self) -> np.ndarray:
        """Bus position of every generator"""

        return np.array([self.bus_index[gen.bus] for gen in self.generators], dtype=int)

    @cached_property
    def wind_bus(self) -> np.ndarray:
        """Bus position of every wind farm"""

        return np.array([self.bus_index[farm.bus] for farm in self.wind_farms], dtype=int)

    def gen_incidence(self) -> np.ndarray:
        """The n_bus x n_gen matrix placing each generator at its bus"""

        matrix = np.zeros((self.n_bus, self.n_gen))
        matrix[self.gen_bus, np.arange(self.n_gen)] = 1.0
        return matrix

    def wind_incidence(self) -> np.ndarray:
        """The n_bus x n_wind matrix placing each wind farm at its bus"""

        matrix = np.zeros((self.n_bus, self.n_wind))
        matrix[self.wind_bus, np.arange(self.n_wind)] = 1.0
        return matrix

    def array(self, collection: str, attribute: str) -> np.ndarray:
        """Gather one attribute of buses/branches/generators/wind_farms as a vector"""

        return np.array([getattr(item, attribute) for item in getattr(self, collection)], dtype=float)

    def net_load(self, zeta: np.ndarray = None) -> Tuple[np.ndarray, np.ndarray]:
        """The per-bus (p, q) consumed by loads minus what the wind farms inject.
        A wind forecast error `zeta` (one entry per farm) is added to the wind
        active injection; its reactive counterpart follows the power factor only
        at PQ buses, a PV bus regulates its own voltage and absorbs it.
        """

        p_net = self.array('buses', 'p_load').copy()
        q_net = self.array('buses', 'q_load').copy()
        if not self.wind_farms:
            return p_net, q_net
        wind_p = self.array('wind_farms', 'forecast')
        tan_phi = self.array('wind_farms', 'tan_phi')
        wind_q = wind_p * tan_phi
        if zeta is not None:
            wind_p = wind_p + zeta
            delta_q = np.asarray(zeta) * tan_phi
            at_pq = np.isin(self.wind_bus, self.pq)
            wind_q = wind_q + np.where(at_pq, delta_q, 0.0)
        np.subtract.at(p_net, self.wind_bus, wind_p)
        np.subtract.at(q_net, self.wind_bus, wind_q)
        return p_net, q_net


def scale_wind(net: Network, factor: float) -> Network:
    """Multiply every wind farm's capacity and forecast by factor"""

    if factor < 0:
        raise CaseValidationError('wind scale', f'factor must be non-negative, got {factor}')
    farms = tuple(
        replace(farm, capacity=farm.capacity * factor, forecast=farm.forecast * factor)
        for farm in net.wind_farms
    )
    LOGGER.info('Scaled %d wind farms by %s', len(farms), factor)
    return replace(net, wind_farms=farms)


def _validate(net: Network) -> None:  # pylint: disable=too-many-branches
    if net.base_mva <= 0:
        raise CaseValidationError('positive base', f'base MVA is {net.base_mva}')
    if not net.buses:
        raise CaseValidationError('non-empty network', 'the case has no buses')

    ids = [bus.bus_id for bus in net.buses]
    if len(set(ids)) != len(ids):
        raise CaseValidationError('unique bus ids', 'a bus id appears more than once')
    refs = [bus.bus_id for bus in net.buses if bus.bus_type == REF_BUS_TYPE]
    if len(refs) != 1:
        raise CaseValidationError(
            'exactly one reference bus', f'found {len(refs)} reference buses {refs}',
        )
    for bus in net.buses:
        if not 0 < bus.v_min <= bus.v_max:
            raise CaseValidationError(
                'voltage bounds', f'bus {bus.bus_id} has v_min={bus.v_min}, v_max={bus.v_max}',
            )

    known = set(ids)
    for branch in net.branches:
        if branch.from_bus not in known or branch.to_bus not in known:
            raise CaseValidationError(
                'branch endpoints exist', f'branch {branch.from_bus}-{branch.to_bus}',
            )
        if branch.in_service and branch.x == 0:
            raise CaseValidationError(
                'non-zero reactance', f'branch {branch.from_bus}-{branch.to_bus} has x=0',
            )
        if branch.shift != 0:
            raise CaseValidationError(
                'no phase shifters',
                f'branch {branch.from_bus}-{branch.to_bus} has a shift angle of {branch.shift}',
            )
        if branch.rate < 0 or branch.ratio <= 0:
            raise CaseValidationError(
                'branch ratings', f'branch {branch.from_bus}-{branch.to_bus}',
            )

    for gen in net.generators:
        if gen.bus not in known:
            raise CaseValidationError('generator bus exists', f'generator at bus {gen.bus}')
        if min(gen.cost) < 0:
            raise CaseValidationError('convex cost', f'generator at bus {gen.bus} has cost {gen.cost}')
        if gen.p_min > gen.p_max or gen.q_min > gen.q_max:
            raise CaseValidationError('generator limits', f'generator at bus {gen.bus}')
        if gen.reserve_up_price < 0 or gen.reserve_down_price < 0:
            raise CaseValidationError('reserve prices', f'generator at bus {gen.bus}')
    if refs[0] not in {gen.bus for gen in net.generators}:
        raise CaseValidationError('reference bus generation', f'bus {refs[0]} has no generator')

    for farm in net.wind_farms:
        if farm.bus not in known:
            raise CaseValidationError('wind farm bus exists', f'wind farm at bus {farm.bus}')
        if not 0 <= farm.forecast <= farm.capacity:
            raise CaseValidationError(
                'wind forecast within capacity',
                f'wind farm at bus {farm.bus}: forecast {farm.forecast}, capacity {farm.capacity}',
            )
        if not 0 < farm.power_factor <= 1:
            raise CaseValidationError('power factor', f'wind farm at bus {farm.bus}')

    position = {bus_id: pos for pos, bus_id in enumerate(ids)}
    links = [
        (position[branch.from_bus], position[branch.to_bus])
        for branch in net.branches if branch.in_service
    ]
    if links:
        rows, cols = zip(*links)
    else:
        rows, cols = (), ()
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ids), len(ids)))
    n_components, _ = connected_components(graph, directed=False)
    if n_components != 1:
        raise CaseValidationError(
            'connected network', f'the in-service branches form {n_components} islands',
        )
