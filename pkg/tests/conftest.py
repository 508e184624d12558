"""
pytest configuration for wdro_opf unit tests
"""

import os

import pytest

import wdro_opf
from wdro_opf.case_io import Branch, Bus, Generator, Network, WindFarm, load_case
from wdro_opf.opfcore import OpfSettings, solve_with_enforcement
from wdro_opf.simlab import RngProtocol, generate_samples


CASES = os.path.join(os.path.dirname(wdro_opf.__file__), 'cases')
CASE118_ENV = 'WDRO_OPF_CASE118'


def pytest_collection_modifyitems(config, items):  # pylint: disable=unused-argument
    """The 118-bus studies only run when a case file is pointed at"""

    if os.environ.get(CASE118_ENV):
        return
    skip = pytest.mark.skip(reason=f'set {CASE118_ENV} to a 118-bus case file to run it')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session')
def ieee14():
    """The 14-bus case without wind"""

    return load_case(os.path.join(CASES, 'ieee14.m'))


@pytest.fixture(scope='session')
def ieee14_wind():
    """The 14-bus case with four wind farms and 40 MW branch ratings"""

    return load_case(os.path.join(CASES, 'ieee14_wind.m'))


@pytest.fixture(scope='session')
def laplace_samples(ieee14_wind):  # pylint: disable=redefined-outer-name
    """200 Laplace forecast errors for the wind farms of the 14-bus case"""

    return generate_samples(RngProtocol(distribution='laplace', seed=7), ieee14_wind.wind_farms, 200)


@pytest.fixture
def two_bus():
    """A generator feeding a load bus that also hosts a wind farm"""

    return Network(
        base_mva=100.0,
        buses=(
            Bus(1, 3, 0.0, 0.0, 0.0, 0.0, 0.9, 1.1, v_init=1.02),
            Bus(2, 1, 0.8, 0.2, 0.0, 0.0, 0.9, 1.1),
        ),
        branches=(Branch(1, 2, 0.01, 0.1, 0.02, rate=1.5),),
        generators=(
            Generator(1, 0.0, 2.0, -1.0, 1.0, (100.0, 2000.0, 0.0), 1000.0, 1000.0, p_init=0.5, v_set=1.02),
        ),
        wind_farms=(WindFarm(2, 0.6, 0.3),),
        name='two-bus',
    )


@pytest.fixture
def three_bus():
    """A meshed three-bus case: reference, PV and load bus with a wind farm"""

    return Network(
        base_mva=100.0,
        buses=(
            Bus(1, 3, 0.0, 0.0, 0.0, 0.0, 0.9, 1.1, v_init=1.02),
            Bus(2, 2, 0.2, 0.05, 0.0, 0.0, 0.9, 1.1, v_init=1.01),
            Bus(3, 1, 0.9, 0.3, 0.0, 0.0, 0.9, 1.1),
        ),
        branches=(
            Branch(1, 2, 0.01, 0.1, 0.02, rate=1.0),
            Branch(2, 3, 0.02, 0.12, 0.02, rate=1.0),
            Branch(1, 3, 0.015, 0.11, 0.02, rate=1.0),
        ),
        generators=(
            Generator(1, 0.0, 2.0, -1.0, 1.0, (100.0, 2000.0, 0.0), 1000.0, 1000.0, p_init=0.5, v_set=1.02),
            Generator(2, 0.0, 1.0, -0.5, 0.5, (200.0, 2500.0, 0.0), 1250.0, 1250.0, p_init=0.3, v_set=1.01),
        ),
        wind_farms=(WindFarm(3, 0.6, 0.3, power_factor=0.95),),
        name='three-bus',
    )


@pytest.fixture(scope='function')
def clean_registry():
    """Give each test an empty command registry and put the real one back after"""

    saved = wdro_opf.commands.COMMAND_REGISTRY
    wdro_opf.commands.COMMAND_REGISTRY = {}
    yield wdro_opf.commands.COMMAND_REGISTRY
    wdro_opf.commands.COMMAND_REGISTRY = saved


@pytest.fixture(scope='session')
def wdro_solution(ieee14_wind, laplace_samples):  # pylint: disable=redefined-outer-name
    """The WDRO strategy of the 14-bus wind case and its report"""

    return solve_with_enforcement(ieee14_wind, laplace_samples, OpfSettings())


@pytest.fixture(scope='session')
def ieee14_wind_path():
    """Path of the 14-bus wind case file"""

    return os.path.join(CASES, 'ieee14_wind.m')


@pytest.fixture
def protocol_path(tmp_path):
    """A Laplace protocol file with a fixed seed"""

    path = tmp_path / 'protocol.json'
    path.write_text('{"distribution": "laplace", "seed": 7}', encoding='utf-8')
    return str(path)
