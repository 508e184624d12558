"""
A test module running the enforcement loop on a 118-bus case. The case file
is not shipped; point WDRO_OPF_CASE118 at one to run these.
"""

import os

import pytest

from wdro_opf.case_io import load_case
from wdro_opf.opfcore import OpfSettings, solve_with_enforcement
from wdro_opf.simlab import RngProtocol, evaluate_strategy, generate_samples


CASE118_ENV = 'WDRO_OPF_CASE118'


@pytest.mark.slow
def test_large_case_strategy():
    """Verify the strategy of a large case is valid and keeps violations rare"""

    net = load_case(os.environ[CASE118_ENV])
    if not net.n_wind:
        pytest.skip('the 118-bus case has no wind farms')
    samples = generate_samples(RngProtocol(distribution='laplace', seed=1), net.wind_farms, 1000)
    strategy, report = solve_with_enforcement(net, samples, OpfSettings(jobs=4))
    assert strategy.violations(net) == []

    trials = generate_samples(RngProtocol(distribution='laplace', seed=2), net.wind_farms, 20000)
    evaluation = evaluate_strategy(net, strategy, trials, model='approx')
    assert evaluation.lowest[1] >= 0.95 - 3 * evaluation.standard_error
