"""
This module holds the operating strategy, the decision vector of the OPF, and
its JSON form. In JSON, powers are in MW/MVAr, voltages in p.u. and angles in
radians, with generators and buses keyed by the bus ids of the case file.
"""

from dataclasses import dataclass
import json
import logging
from typing import Dict, Tuple

import numpy as np

from wdro_opf.case_io import Network


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class OperatingStrategy:  # pylint: disable=too-many-instance-attributes
    """Nominal setpoints, participation factors and reserves (all p.u.).

    Attributes:
        theta: Bus voltage angles.
        v: Bus voltage magnitudes.
        pg: Active output of every generator.
        qg: Reactive output of every generator.
        alpha: AGC participation factors.
        r_up: Upward reserve r̄.
        r_dn: Downward reserve r̲.
        lam: The multiplier of the worst-case cost bound.
        method: Which formulation produced the strategy.
    """

    theta: np.ndarray
    v: np.ndarray
    pg: np.ndarray
    qg: np.ndarray
    alpha: np.ndarray
    r_up: np.ndarray
    r_dn: np.ndarray
    lam: float = 0.0
    method: str = 'wdro'

    def violations(self, net: Network, tol: float = 1e-6) -> list:
        """Names of the strategy invariants that don't hold"""

        problems = []
        if abs(self.alpha.sum() - 1.0) > tol:
            problems.append(f'participation factors sum to {self.alpha.sum():.8f}')
        if np.any(self.alpha < -tol):
            problems.append('negative participation factor')
        if np.any(self.r_up < -tol) or np.any(self.r_dn < -tol):
            problems.append('negative reserve')
        degenerate = np.array([gen.degenerate for gen in net.generators], dtype=bool)
        if np.any(np.abs(self.alpha[degenerate]) > tol):
            problems.append('a unit without headroom takes part in regulation')
        if abs(self.theta[net.ref]) > tol:
            problems.append('reference angle is not zero')
        return problems


def strategy_to_json(strategy: OperatingStrategy, net: Network, meta: Dict = None) -> str:
    """Write a strategy and free-form metadata (objective, rounds, timings) as JSON.

    Args:
        strategy: The strategy.
        net: The network it belongs to.
        meta: Extra top-level entries.
    """

    base = net.base_mva
    document = {
        'schema': SCHEMA_VERSION,
        'case': net.name,
        'method': strategy.method,
        'base_mva': base,
        'lambda': float(strategy.lam),
        'generators': [
            {
                'bus': gen.bus,
                'pg': float(strategy.pg[i] * base),
                'qg': float(strategy.qg[i] * base),
                'alpha': float(strategy.alpha[i]),
                'r_up': float(strategy.r_up[i] * base),
                'r_dn': float(strategy.r_dn[i] * base),
            }
            for i, gen in enumerate(net.generators)
        ],
        'buses': [
            {'bus': bus.bus_id, 'v': float(strategy.v[i]), 'theta': float(strategy.theta[i])}
            for i, bus in enumerate(net.buses)
        ],
    }
    document.update(meta or {})
    return json.dumps(document, indent=2, sort_keys=True)


def strategy_from_json(text: str, net: Network) -> Tuple[OperatingStrategy, Dict]:
    """Read a strategy back for the network it was computed on.

    Returns:
        The strategy and the whole JSON document.

    Raises:
        ValueError: when the document doesn't match the network.
    """

    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f'strategy is not valid JSON: {exc}') from exc
    if document.get('schema') != SCHEMA_VERSION:
        raise ValueError(f'unsupported strategy schema {document.get("schema")}')
    gens = document.get('generators', [])
    buses = document.get('buses', [])
    if len(gens) != net.n_gen or len(buses) != net.n_bus:
        raise ValueError(
            f'strategy has {len(gens)} generators and {len(buses)} buses, '
            f'the case has {net.n_gen} and {net.n_bus}'
        )
    if [gen['bus'] for gen in gens] != [gen.bus for gen in net.generators]:
        raise ValueError('strategy generators sit at different buses than the case')
    if [bus['bus'] for bus in buses] != [bus.bus_id for bus in net.buses]:
        raise ValueError('strategy buses differ from the case')
    base = net.base_mva

    def column(records, key, scale=1.0):
        return np.array([float(record[key]) / scale for record in records])

    strategy = OperatingStrategy(
        theta=column(buses, 'theta'),
        v=column(buses, 'v'),
        pg=column(gens, 'pg', base),
        qg=column(gens, 'qg', base),
        alpha=column(gens, 'alpha'),
        r_up=column(gens, 'r_up', base),
        r_dn=column(gens, 'r_dn', base),
        lam=float(document.get('lambda', 0.0)),
        method=document.get('method', 'wdro'),
    )
    return strategy, document
