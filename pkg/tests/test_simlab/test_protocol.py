"""
A test module for the wdro_opf.simlab.protocol module
"""

from contextlib import ExitStack as does_not_raise
import json

import numpy as np
from numpy.testing import assert_allclose
import pytest

from wdro_opf.simlab import (
    ProtocolError, RngProtocol, generate_samples, load_protocol, read_samples, write_samples,
)


@pytest.mark.parametrize("kwargs, expectation", [
    ({'distribution': 'laplace'}, does_not_raise()),
    ({'distribution': 'mixture', 'mixture_weight': 1.0}, does_not_raise()),
    ({'distribution': 'cauchy'}, pytest.raises(ProtocolError, match='unknown distribution')),
    ({'distribution': 'gaussian', 'scale_fraction': -0.1}, pytest.raises(ProtocolError, match='scale_fraction')),
    ({'distribution': 'gaussian', 'wind_scale': -1}, pytest.raises(ProtocolError, match='wind_scale')),
    ({'distribution': 'mixture', 'mixture_weight': 1.5}, pytest.raises(ProtocolError, match='mixture_weight')),
    ({'distribution': 'gaussian', 'correlation': [[1.0, 0.5]]}, pytest.raises(ProtocolError, match='square')),
    ({'distribution': 'gaussian', 'correlation': [[1.0, 0.5], [0.4, 1.0]]},
     pytest.raises(ProtocolError, match='symmetric')),
    ({'distribution': 'gaussian', 'correlation': [[1.0, 2.0], [2.0, 1.0]]},
     pytest.raises(ProtocolError, match='semidefinite')),
])
def test_protocol_validation(kwargs, expectation):
    """Verify a protocol only accepts values it can draw with"""

    with expectation:
        RngProtocol(**kwargs)


@pytest.mark.parametrize("distribution", ['laplace', 'gaussian', 'mixture'])
def test_draws_are_reproducible(ieee14_wind, distribution):
    """Verify the same protocol draws the same errors, inside the farm limits"""

    protocol = RngProtocol(distribution=distribution, seed=3)
    first = generate_samples(protocol, ieee14_wind.wind_farms, 500)
    second = generate_samples(protocol, ieee14_wind.wind_farms, 500)
    assert_allclose(first.data, second.data)
    assert first.labels == ('wind@11', 'wind@12', 'wind@13', 'wind@14')

    forecast = ieee14_wind.array('wind_farms', 'forecast')
    capacity = ieee14_wind.array('wind_farms', 'capacity')
    assert np.all(first.data >= -forecast - 1e-12)
    assert np.all(first.data <= capacity - forecast + 1e-12)

    other = generate_samples(RngProtocol(distribution=distribution, seed=4), ieee14_wind.wind_farms, 500)
    assert not np.allclose(first.data, other.data)


def test_correlated_draws(ieee14_wind):
    """Verify the copula correlation shows in the drawn errors"""

    corr = np.full((4, 4), 0.8) + 0.2 * np.eye(4)
    samples = generate_samples(
        RngProtocol(distribution='gaussian', correlation=corr), ieee14_wind.wind_farms, 5000,
    )
    assert np.corrcoef(samples.data, rowvar=False)[0, 1] == pytest.approx(0.8, abs=0.05)

    with pytest.raises(ProtocolError, match='4 wind farms'):
        generate_samples(
            RngProtocol(distribution='gaussian', correlation=np.eye(2)), ieee14_wind.wind_farms, 10,
        )


def test_no_samples(ieee14_wind):
    """Verify at least one draw is asked for"""

    with pytest.raises(ProtocolError, match='at least one sample'):
        generate_samples(RngProtocol(distribution='laplace'), ieee14_wind.wind_farms, 0)


def test_load_protocol(tmp_path):
    """Verify protocols are read from dicts and files and unknown keys refused"""

    protocol = RngProtocol(distribution='gaussian', seed=9, correlation=np.eye(2))
    path = tmp_path / 'protocol.json'
    path.write_text(json.dumps(protocol.as_dict()))
    loaded = load_protocol(str(path))
    assert loaded.seed == 9
    assert_allclose(loaded.correlation, np.eye(2))
    assert load_protocol({'distribution': 'laplace'}).seed == 42

    with pytest.raises(ProtocolError, match='unknown protocol keys'):
        load_protocol({'distribution': 'laplace', 'sed': 1})
    with pytest.raises(ProtocolError, match='needs at least'):
        load_protocol({'seed': 1})
    with pytest.raises(ProtocolError, match='invalid protocol value'):
        load_protocol({'distribution': 'laplace', 'seed': 'abc'})
    with pytest.raises(ProtocolError, match='cannot read protocol'):
        load_protocol(str(tmp_path / 'missing.json'))


def test_sample_files(tmp_path, ieee14_wind, laplace_samples):
    """Verify sample files are written in MW and read back in p.u."""

    path = str(tmp_path / 'nested' / 'samples.csv')
    write_samples(laplace_samples, path, ieee14_wind.base_mva)
    header, first = (tmp_path / 'nested' / 'samples.csv').read_text(encoding='utf-8').splitlines()[:2]
    assert header == 'wind@11,wind@12,wind@13,wind@14'
    assert float(first.split(',')[0]) == pytest.approx(laplace_samples.data[0, 0] * 100.0)

    read_back = read_samples(path, ieee14_wind.base_mva, ieee14_wind.wind_farms)
    assert_allclose(read_back.data, laplace_samples.data, rtol=1e-9)

    with pytest.raises(ProtocolError, match='do not match the wind farms'):
        read_samples(path, ieee14_wind.base_mva, ieee14_wind.wind_farms[:2])
    with pytest.raises(ProtocolError, match='cannot read samples'):
        read_samples(str(tmp_path / 'missing.csv'), ieee14_wind.base_mva)
