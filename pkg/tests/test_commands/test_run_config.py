"""
A test module for the wdro_opf.commands.run_config module
"""

import json

from numpy.testing import assert_allclose
import pytest

from wdro_opf.commands import CommandError
from wdro_opf.commands.run_config import CACHE_ENV, RunConfig
from wdro_opf.simlab import RngProtocol, generate_samples


@pytest.fixture(autouse=True)
def no_cache_env(monkeypatch):
    """Keep the caller's cache directory out of these tests"""

    monkeypatch.delenv(CACHE_ENV, raising=False)


@pytest.mark.parametrize("kwargs, message", [
    ({'samples': 'a.csv', 'protocol': 'p.json'}, 'not both'),
    ({'rho': (0.05, 0.1)}, 'expected 1 or 4'),
    ({'rho': (0.0,)}, 'rho must lie'),
])
def test_validation(kwargs, message):
    """Verify settings that can't describe a run are refused"""

    with pytest.raises(CommandError, match=message):
        RunConfig(case='case.m', **kwargs)


def test_cache_directory(monkeypatch, ieee14_wind):
    """Verify the environment names the cache directory and the file is per β and σ_max"""

    config = RunConfig(case='case.m', cache_dir='here')
    assert config.cache_dir == 'here'
    assert config.cache_path(ieee14_wind).endswith('-beta0.9-sigma10.json')
    assert RunConfig(case='case.m', cache_dir=None).cache_path(ieee14_wind) is None

    monkeypatch.setenv(CACHE_ENV, '/tmp/elsewhere')
    assert RunConfig(case='case.m', cache_dir='here').cache_dir == '/tmp/elsewhere'


def test_config_hash(ieee14_wind, laplace_samples):
    """Verify the hash follows the settings and the data, not the paths"""

    config = RunConfig(case='a.m', protocol='p.json', out='one')
    same = RunConfig(case='b.m', protocol='q.json', out='two', jobs=4)
    other = RunConfig(case='a.m', protocol='p.json', beta=0.8)
    digest = config.config_hash(ieee14_wind, laplace_samples)
    assert same.config_hash(ieee14_wind, laplace_samples) == digest
    assert other.config_hash(ieee14_wind, laplace_samples) != digest
    assert config.config_hash(ieee14_wind, None) != digest
    assert 'case' not in config.canonical()
    assert config.canonical()['rho'] == [0.05]


def test_samples_from_protocol(ieee14_wind_path, protocol_path):
    """Verify --seed replaces the protocol seed and the evaluation uses the next one"""

    config = RunConfig(case=ieee14_wind_path, protocol=protocol_path, seed=11, n_samples=50, n_mc=30)
    net = config.load_network()
    history = config.load_samples(net)
    evaluation = config.evaluation_samples(net)
    assert history.n_samples == 50
    assert evaluation.n_samples == 30
    assert_allclose(history.data, generate_samples(RngProtocol('laplace', seed=11), net.wind_farms, 50).data)
    assert_allclose(evaluation.data, generate_samples(RngProtocol('laplace', seed=12), net.wind_farms, 30).data)
    assert config.load_samples(net, 20).n_samples == 20


def test_wind_scale(tmp_path, ieee14_wind_path, ieee14_wind):
    """Verify the protocol's wind scale is applied to the case"""

    path = tmp_path / 'scaled.json'
    path.write_text(json.dumps({'distribution': 'gaussian', 'wind_scale': 2.0}), encoding='utf-8')
    net = RunConfig(case=ieee14_wind_path, protocol=str(path)).load_network()
    assert_allclose(net.array('wind_farms', 'forecast'), 2.0 * ieee14_wind.array('wind_farms', 'forecast'))


def test_no_sample_source(ieee14_wind_path):
    """Verify a run without samples has no history and can't be evaluated"""

    config = RunConfig(case=ieee14_wind_path)
    net = config.load_network()
    assert config.load_samples(net) is None
    with pytest.raises(CommandError, match='needs --protocol or --samples'):
        config.evaluation_samples(net)


def test_method_config(ieee14_wind):
    """Verify the method settings and the errors they can raise"""

    config = RunConfig(
        case='case.m', rho=(0.1, 0.05, 0.05, 0.02), relax=['flow'], fallback=True, enforce_all=True, cache_dir=None,
    )
    method = config.method_config(ieee14_wind, 'gsp')
    assert method.method == 'gsp'
    assert method.settings.rho.reserve == 0.1
    assert method.settings.rho.flow == 0.02
    assert method.settings.relax == ('flow',)
    assert method.settings.cache_path is None
    assert method.settings.fallback
    assert method.settings.enforce_all

    with pytest.raises(CommandError, match='needs every rho'):
        RunConfig(case='case.m', method='mdro', rho=(1.0,)).method_config(ieee14_wind)


def test_from_document():
    """Verify recorded settings come back with the paths replaced"""

    config = RunConfig(case='a.m', protocol='p.json', beta=0.8, rho=(0.1,))
    document = {'config': config.canonical()}
    restored = RunConfig.from_document(document, case='b.m', protocol='q.json')
    assert restored.beta == 0.8
    assert restored.rho == (0.1,)
    assert restored.case == 'b.m'

    with pytest.raises(CommandError, match='no run settings'):
        RunConfig.from_document({}, case='b.m')
    with pytest.raises(CommandError, match='not usable'):
        RunConfig.from_document({'config': {'gamma': 1}}, case='b.m')


def test_out_path(tmp_path):
    """Verify the output directory is made on demand"""

    config = RunConfig(case='a.m', out=str(tmp_path / 'new'))
    path = config.out_path('strategy.json')
    assert (tmp_path / 'new').is_dir()
    assert path == str(tmp_path / 'new' / 'strategy.json')
