"""
A test module for the wdro_opf.rivals.dispatch module
"""

import math

import numpy as np
import pytest

from wdro_opf.case_io import build_admittance
from wdro_opf.chance import monitored_quantities
from wdro_opf.chance.robust import KINDS
from wdro_opf.linresponse import build_response
from wdro_opf.opfcore import OpfSettings
from wdro_opf.rivals import MethodConfig, moment_margin, solve_method


RESERVE_ONLY = OpfSettings(relax=KINDS)
VOLTAGE_ONLY = OpfSettings(relax=('reactive', 'flow'))


@pytest.fixture(scope='module')
def reserve_strategies(ieee14_wind, laplace_samples):
    """The strategies of every method with only the reserve constraint"""

    return {
        method: solve_method(ieee14_wind, laplace_samples, MethodConfig(method=method, settings=RESERVE_ONLY))[0]
        for method in ('wdro', 'ro', 'mdro', 'gsp')
    }


def _total_reserve(strategy):
    return float(strategy.r_up.sum() + strategy.r_dn.sum())


def test_every_method_is_tagged(reserve_strategies):
    """Verify each strategy carries its method and valid participation factors"""

    for method, strategy in reserve_strategies.items():
        assert strategy.method == method
        assert strategy.alpha.sum() == pytest.approx(1.0, abs=1e-6)


def test_robust_covers_every_sample(reserve_strategies, laplace_samples):
    """Verify the robust reserve covers the largest shortfall and surplus seen"""

    omega = laplace_samples.data.sum(axis=1)
    strategy = reserve_strategies['ro']
    assert strategy.r_up.sum() >= -omega.min() - 1e-6
    assert strategy.r_dn.sum() >= omega.max() - 1e-6


def test_reserve_ordering(reserve_strategies):
    """Verify the robust set needs the most reserve and Chebyshev more than Gauss"""

    assert _total_reserve(reserve_strategies['ro']) >= _total_reserve(reserve_strategies['wdro']) - 1e-6
    assert _total_reserve(reserve_strategies['mdro']) >= _total_reserve(reserve_strategies['gsp']) - 1e-6


@pytest.mark.parametrize("method", ['mdro', 'gsp'])
def test_final_strategy_meets_cone_margins(ieee14_wind, laplace_samples, method):
    """Verify mean plus or minus k standard deviations of every voltage stays within its limits"""

    strategy, _ = solve_method(ieee14_wind, laplace_samples, MethodConfig(method=method, settings=VOLTAGE_ONLY))
    rm = build_response(ieee14_wind, build_admittance(ieee14_wind))
    k = moment_margin(VOLTAGE_ONLY.rho.voltage, method)
    for quantity in monitored_quantities(ieee14_wind, rm, kinds=['voltage']):
        projected = laplace_samples.project(quantity.projection)
        weights = np.array([float(np.asarray(quantity.alpha_row) @ strategy.alpha), 1.0])
        center = strategy.v[quantity.index] + float(weights @ projected.mean)
        spread = k * math.sqrt(max(float(weights @ projected.cov @ weights), 0.0))
        assert center + spread <= quantity.upper + 1e-5, quantity.qid
        assert center - spread >= quantity.lower - 1e-5, quantity.qid
