"""
A test module for the wdro_opf.opfcore.strategy module
"""

from dataclasses import replace
import json

import numpy as np
from numpy.testing import assert_allclose
import pytest

from wdro_opf.opfcore import OperatingStrategy, strategy_from_json, strategy_to_json


def _strategy(net) -> OperatingStrategy:
    n_gen = net.n_gen
    return OperatingStrategy(
        theta=np.linspace(0.0, -0.2, net.n_bus), v=np.full(net.n_bus, 1.03),
        pg=np.array([0.8, 0.4, 0.3, 0.2, 0.1]), qg=np.array([0.0, 0.1, 0.1, 0.05, 0.05]),
        alpha=np.array([0.4, 0.3, 0.1, 0.1, 0.1]), r_up=np.full(n_gen, 0.02), r_dn=np.full(n_gen, 0.03),
        lam=12.5, method='wdro',
    )


def test_json_in_mw(ieee14_wind):
    """Verify the file carries MW values and the metadata at the top level"""

    text = strategy_to_json(_strategy(ieee14_wind), ieee14_wind, meta={'objective': {'bound': 1.0}})
    document = json.loads(text)
    assert document['schema'] == 1
    assert document['method'] == 'wdro'
    assert document['objective'] == {'bound': 1.0}
    assert document['generators'][0]['pg'] == pytest.approx(80.0)
    assert document['generators'][1]['r_dn'] == pytest.approx(3.0)

    strategy, read_back = strategy_from_json(text, ieee14_wind)
    assert read_back['case'] == ieee14_wind.name
    assert_allclose(strategy.pg, _strategy(ieee14_wind).pg)
    assert_allclose(strategy.theta, _strategy(ieee14_wind).theta)
    assert strategy.lam == 12.5


@pytest.mark.parametrize("edit, message", [
    (lambda document: document.update(schema=2), 'schema'),
    (lambda document: document['generators'].pop(), 'generators'),
    (lambda document: document['generators'][0].update(bus=9), 'different buses'),
    (lambda document: document['buses'][0].update(bus=99), 'buses differ'),
])
def test_json_must_match_case(ieee14_wind, edit, message):
    """Verify a strategy is refused for a case it doesn't belong to"""

    document = json.loads(strategy_to_json(_strategy(ieee14_wind), ieee14_wind))
    edit(document)
    with pytest.raises(ValueError, match=message):
        strategy_from_json(json.dumps(document), ieee14_wind)


def test_json_garbage(ieee14_wind):
    """Verify text that isn't JSON is refused"""

    with pytest.raises(ValueError, match='not valid JSON'):
        strategy_from_json('{', ieee14_wind)


def test_violations(ieee14_wind):
    """Verify each broken strategy invariant is named"""

    strategy = _strategy(ieee14_wind)
    assert strategy.violations(ieee14_wind) == []
    broken = replace(strategy, alpha=np.array([0.5, 0.3, 0.1, 0.1, 0.1]))
    assert broken.violations(ieee14_wind) == ['participation factors sum to 1.10000000']
    broken = replace(strategy, alpha=np.array([1.2, -0.2, 0.0, 0.0, 0.0]), r_up=-strategy.r_up)
    assert broken.violations(ieee14_wind) == ['negative participation factor', 'negative reserve']
    broken = replace(strategy, theta=strategy.theta + 0.1)
    assert broken.violations(ieee14_wind) == ['reference angle is not zero']
