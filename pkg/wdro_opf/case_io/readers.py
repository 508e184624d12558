"""
This module reads and writes case files.

The MATPOWER reader understands `mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
`mpc.branch` and `mpc.gencost` (polynomial model 2 only), with the column
meanings of the MATPOWER manual. Two extension sections carry the data a
standard case does not have:

    mpc.wind = [
        % bus  capacity_mw  forecast_mw  power_factor
        11     36           18           1.0;
    ];

    mpc.reserve = [
        % c_up  c_dn   ($/MWh, one row per generator in mpc.gen order)
        10      10;
    ];

Without `mpc.reserve`, both reserve prices of a unit default to half of its
linear cost coefficient.

The native JSON format mirrors the same content in MW/MVAr units:

    {"name": ..., "base_mva": 100,
     "buses": [{"id", "type", "pd_mw", "qd_mvar", "gs_mw", "bs_mvar",
                "vm", "va_deg", "vmin", "vmax"}],
     "branches": [{"from", "to", "r", "x", "b", "rate_mw", "ratio",
                   "angle_deg", "status"}],
     "generators": [{"bus", "pg_mw", "qg_mvar", "pmin_mw", "pmax_mw",
                     "qmin_mvar", "qmax_mvar", "vg", "cost": [c2, c1, c0],
                     "reserve_price": [up, down]}],
     "wind_farms": [{"bus", "capacity_mw", "forecast_mw", "power_factor"}]}
"""

import hashlib
import json
import logging
import math
import os
import re
from typing import Dict, List, Tuple

from wdro_opf.case_io import CaseParseError
from wdro_opf.case_io.network import (
    Branch, Bus, Generator, Network, WindFarm, cost_from_per_unit, cost_to_per_unit,
    from_per_unit, to_per_unit,
)


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

FORMATS = ('matpower-m', 'native-json')
DEFAULT_RESERVE_FRACTION = 0.5

_SECTION_START = re.compile(r'^\s*mpc\.(\w+)\s*=\s*\[(.*)$')
_SCALAR = re.compile(r'^\s*mpc\.(\w+)\s*=\s*([^\[;]+);')
_FUNCTION = re.compile(r'^\s*function\s+mpc\s*=\s*(\w+)')

# minimum number of columns read from each section
_MIN_COLUMNS = {'bus': 13, 'gen': 10, 'branch': 11, 'gencost': 4, 'wind': 4, 'reserve': 2}


def parse_case(text: str, fmt: str = 'matpower-m') -> Network:
    """Parse the contents of a case file into a validated Network.

    Args:
        text: The file contents.
        fmt: Either 'matpower-m' or 'native-json'.
    """

    if fmt == 'matpower-m':
        return _parse_matpower(text)
    if fmt == 'native-json':
        return _parse_native(text)
    raise CaseParseError(f'unknown case format "{fmt}", expected one of {", ".join(FORMATS)}')


def load_case(path: str) -> Network:
    """Read a case file from disk, choosing the format from its suffix (.m or .json)"""

    fmt = 'native-json' if path.lower().endswith('.json') else 'matpower-m'
    try:
        with open(path, encoding='utf-8') as case_file:
            text = case_file.read()
    except OSError as exc:
        raise CaseParseError(f'unable to read {path}: {exc.strerror}') from exc
    net = parse_case(text, fmt)
    LOGGER.info(
        'Loaded %s: %d buses, %d branches, %d generators, %d wind farms',
        os.path.basename(path), net.n_bus, net.n_branch, net.n_gen, net.n_wind,
    )
    return net


def serialize_case(net: Network) -> str:
    """Write a network out in the native JSON format"""

    base = net.base_mva
    document = {
        'name': net.name,
        'base_mva': base,
        'buses': [
            {
                'id': bus.bus_id, 'type': bus.bus_type,
                'pd_mw': from_per_unit(bus.p_load, base), 'qd_mvar': from_per_unit(bus.q_load, base),
                'gs_mw': from_per_unit(bus.g_shunt, base), 'bs_mvar': from_per_unit(bus.b_shunt, base),
                'vm': bus.v_init, 'va_deg': math.degrees(bus.theta_init),
                'vmin': bus.v_min, 'vmax': bus.v_max,
            }
            for bus in net.buses
        ],
        'branches': [
            {
                'from': br.from_bus, 'to': br.to_bus, 'r': br.r, 'x': br.x, 'b': br.b,
                'rate_mw': from_per_unit(br.rate, base), 'ratio': br.ratio,
                'angle_deg': math.degrees(br.shift), 'status': int(br.in_service),
            }
            for br in net.branches
        ],
        'generators': [
            {
                'bus': gen.bus, 'pg_mw': from_per_unit(gen.p_init, base),
                'qg_mvar': from_per_unit(gen.q_init, base),
                'pmin_mw': from_per_unit(gen.p_min, base), 'pmax_mw': from_per_unit(gen.p_max, base),
                'qmin_mvar': from_per_unit(gen.q_min, base), 'qmax_mvar': from_per_unit(gen.q_max, base),
                'vg': gen.v_set, 'cost': list(cost_from_per_unit(gen.cost, base)),
                'reserve_price': [gen.reserve_up_price / base, gen.reserve_down_price / base],
            }
            for gen in net.generators
        ],
        'wind_farms': [
            {
                'bus': farm.bus, 'capacity_mw': from_per_unit(farm.capacity, base),
                'forecast_mw': from_per_unit(farm.forecast, base), 'power_factor': farm.power_factor,
            }
            for farm in net.wind_farms
        ],
    }
    return json.dumps(document, indent=2, sort_keys=True)


def case_hash(net: Network) -> str:
    """A stable fingerprint of the network content"""

    return hashlib.sha256(serialize_case(net).encode('utf-8')).hexdigest()


def _parse_matpower(text: str) -> Network:  # pylint: disable=too-many-branches
    name = 'case'
    base_mva = None
    sections: Dict[str, List[Tuple[int, List[float]]]] = {}
    current = None

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split('%', 1)[0].strip()
        if not line:
            continue
        if current is None:
            match = _FUNCTION.match(line)
            if match:
                name = match.group(1)
                continue
            match = _SECTION_START.match(line)
            if match:
                current = match.group(1)
                sections[current] = []
                line = match.group(2)
            else:
                match = _SCALAR.match(line)
                if match and match.group(1) == 'baseMVA':
                    base_mva = _number(match.group(2), line_no, 'baseMVA')
                continue

        closing = '];' in line or line.endswith(']')
        body = line.split(']', 1)[0]
        for chunk in body.split(';'):
            tokens = chunk.replace(',', ' ').split()
            if tokens:
                values = [
                    _number(tok, line_no, f'mpc.{current} column {col + 1}')
                    for col, tok in enumerate(tokens)
                ]
                sections[current].append((line_no, values))
        if closing:
            current = None

    if current is not None:
        raise CaseParseError(f'section mpc.{current} is never closed')
    if base_mva is None:
        raise CaseParseError('missing mpc.baseMVA', field='baseMVA')
    for required in ('bus', 'gen', 'branch', 'gencost'):
        if required not in sections:
            raise CaseParseError(f'missing section mpc.{required}', field=required)
    for section, rows in sections.items():
        minimum = _MIN_COLUMNS.get(section)
        for line_no, values in rows:
            if minimum and len(values) < minimum:
                raise CaseParseError(
                    f'expected at least {minimum} columns, found {len(values)}',
                    line=line_no, field=f'mpc.{section}',
                )

    return _build_from_matpower(name, base_mva, sections)


# pylint: disable=too-many-locals
def _build_from_matpower(name: str, base: float, sections: Dict) -> Network:
    buses = []
    for line_no, row in sections['bus']:
        bus_type = int(row[1])
        if bus_type not in (1, 2, 3):
            raise CaseParseError(f'unsupported bus type {bus_type}', line=line_no, field='BUS_TYPE')
        buses.append(Bus(
            bus_id=int(row[0]), bus_type=bus_type,
            p_load=to_per_unit(row[2], base), q_load=to_per_unit(row[3], base),
            g_shunt=to_per_unit(row[4], base), b_shunt=to_per_unit(row[5], base),
            v_init=row[7], theta_init=math.radians(row[8]),
            v_max=row[11], v_min=row[12],
        ))

    branches = []
    for _, row in sections['branch']:
        branches.append(Branch(
            from_bus=int(row[0]), to_bus=int(row[1]), r=row[2], x=row[3], b=row[4],
            rate=to_per_unit(row[5], base), ratio=row[8] if row[8] != 0 else 1.0,
            shift=math.radians(row[9]), in_service=row[10] > 0,
        ))

    gen_rows = sections['gen']
    cost_rows = sections['gencost']
    if len(cost_rows) < len(gen_rows):
        raise CaseParseError(
            f'{len(gen_rows)} generators but only {len(cost_rows)} cost rows', field='mpc.gencost',
        )
    reserve_rows = sections.get('reserve')
    if reserve_rows is not None and len(reserve_rows) != len(gen_rows):
        raise CaseParseError(
            f'{len(gen_rows)} generators but {len(reserve_rows)} reserve rows', field='mpc.reserve',
        )

    generators = []
    for index, (line_no, row) in enumerate(gen_rows):
        if row[7] <= 0:
            LOGGER.debug('Skipping out-of-service generator at bus %d', int(row[0]))
            continue
        cost = _polynomial_cost(*cost_rows[index])
        if reserve_rows is not None:
            reserve = (reserve_rows[index][1][0], reserve_rows[index][1][1])
        else:
            reserve = (DEFAULT_RESERVE_FRACTION * cost[1], DEFAULT_RESERVE_FRACTION * cost[1])
        if min(reserve) < 0:
            raise CaseParseError('negative reserve price', line=line_no, field='mpc.reserve')
        generators.append(Generator(
            bus=int(row[0]), p_init=to_per_unit(row[1], base), q_init=to_per_unit(row[2], base),
            q_max=to_per_unit(row[3], base), q_min=to_per_unit(row[4], base), v_set=row[5],
            p_max=to_per_unit(row[8], base), p_min=to_per_unit(row[9], base),
            cost=cost_to_per_unit(cost, base),
            reserve_up_price=reserve[0] * base, reserve_down_price=reserve[1] * base,
        ))

    farms = []
    for _, row in sections.get('wind', []):
        farms.append(WindFarm(
            bus=int(row[0]), capacity=to_per_unit(row[1], base),
            forecast=to_per_unit(row[2], base), power_factor=row[3],
        ))

    return Network(
        base_mva=base, buses=tuple(buses), branches=tuple(branches),
        generators=tuple(generators), wind_farms=tuple(farms), name=name,
    )


def _polynomial_cost(line_no: int, row: List[float]) -> Tuple[float, float, float]:
    model, n_cost = int(row[0]), int(row[3])
    if model != 2:
        raise CaseParseError('only polynomial cost curves (model 2) are supported', line=line_no,
                             field='MODEL')
    if not 1 <= n_cost <= 3 or len(row) < 4 + n_cost:
        raise CaseParseError(f'unsupported polynomial with {n_cost} terms', line=line_no, field='NCOST')
    coeffs = [0.0] * (3 - n_cost) + list(row[4:4 + n_cost])
    return (coeffs[0], coeffs[1], coeffs[2])


def _number(token: str, line_no: int, field_name: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise CaseParseError(f'"{token}" is not a number', line=line_no, field=field_name) from None


def _parse_native(text: str) -> Network:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseParseError(exc.msg, line=exc.lineno) from exc

    try:
        base = float(document['base_mva'])
        buses = tuple(
            Bus(
                bus_id=int(bus['id']), bus_type=int(bus['type']),
                p_load=to_per_unit(bus.get('pd_mw', 0.0), base),
                q_load=to_per_unit(bus.get('qd_mvar', 0.0), base),
                g_shunt=to_per_unit(bus.get('gs_mw', 0.0), base),
                b_shunt=to_per_unit(bus.get('bs_mvar', 0.0), base),
                v_init=bus.get('vm', 1.0), theta_init=math.radians(bus.get('va_deg', 0.0)),
                v_min=bus['vmin'], v_max=bus['vmax'],
            )
            for bus in document['buses']
        )
        branches = tuple(
            Branch(
                from_bus=int(br['from']), to_bus=int(br['to']), r=br['r'], x=br['x'],
                b=br.get('b', 0.0), rate=to_per_unit(br.get('rate_mw', 0.0), base),
                ratio=br.get('ratio', 1.0) or 1.0, shift=math.radians(br.get('angle_deg', 0.0)),
                in_service=bool(br.get('status', 1)),
            )
            for br in document['branches']
        )
        generators = tuple(_native_generator(gen, base) for gen in document['generators'])
        farms = tuple(
            WindFarm(
                bus=int(farm['bus']), capacity=to_per_unit(farm['capacity_mw'], base),
                forecast=to_per_unit(farm['forecast_mw'], base),
                power_factor=farm.get('power_factor', 1.0),
            )
            for farm in document.get('wind_farms', [])
        )
    except KeyError as exc:
        raise CaseParseError('missing required key', field=exc.args[0]) from exc
    except (TypeError, ValueError) as exc:
        raise CaseParseError(str(exc)) from exc

    return Network(
        base_mva=base, buses=buses, branches=branches, generators=generators,
        wind_farms=farms, name=document.get('name', 'case'),
    )


def _native_generator(gen: Dict, base: float) -> Generator:
    cost = tuple(float(c) for c in gen['cost'])
    if len(cost) != 3:
        raise CaseParseError('cost must hold [c2, c1, c0]', field='cost')
    reserve = gen.get('reserve_price')
    if reserve is None:
        reserve = [DEFAULT_RESERVE_FRACTION * cost[1]] * 2
    return Generator(
        bus=int(gen['bus']), p_init=to_per_unit(gen.get('pg_mw', 0.0), base),
        q_init=to_per_unit(gen.get('qg_mvar', 0.0), base),
        p_min=to_per_unit(gen['pmin_mw'], base), p_max=to_per_unit(gen['pmax_mw'], base),
        q_min=to_per_unit(gen['qmin_mvar'], base), q_max=to_per_unit(gen['qmax_mvar'], base),
        v_set=gen.get('vg', 1.0), cost=cost_to_per_unit(cost, base),
        reserve_up_price=reserve[0] * base, reserve_down_price=reserve[1] * base,
    )
