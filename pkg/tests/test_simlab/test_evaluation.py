"""
A test module for the wdro_opf.simlab.evaluation module
"""

import numpy as np
from numpy.testing import assert_allclose
import pytest

from wdro_opf.simlab import ModelEvaluator, evaluate_strategy
from wdro_opf.simlab.evaluation import ConstraintInfo
from wdro_opf.wasserstein import SampleSet


@pytest.fixture(scope='module')
def quiet_wind():
    """Ten trials where every farm produces its forecast"""

    return SampleSet.from_array(np.zeros((10, 4)))


@pytest.mark.parametrize("model", ['full-ac', 'approx', 'lpf', 'dc'])
def test_forecast_trials_are_reliable(ieee14_wind, wdro_solution, quiet_wind, model):
    """Verify the nominal point meets every constraint and costs the same in every trial"""

    strategy, _ = wdro_solution
    report = evaluate_strategy(ieee14_wind, strategy, quiet_wind, model=model)
    assert report.n_trials == 10
    assert report.failed == 0
    assert report.method == 'wdro'
    assert report.cost_std == pytest.approx(0.0, abs=1e-6)
    if model in ('full-ac', 'approx'):
        # flow limits bind the linear power flow, the AC flow may exceed them
        held = [r for info, r in zip(report.constraints, report.reliabilities) if info.kind != 'flow']
        assert held and all(r == 1.0 for r in held)


def test_approx_matches_ac_at_forecast(ieee14_wind, wdro_solution, quiet_wind):
    """Verify the approximate model starts from the exact AC point"""

    strategy, _ = wdro_solution
    exact = evaluate_strategy(ieee14_wind, strategy, quiet_wind, model='full-ac')
    approx = evaluate_strategy(ieee14_wind, strategy, quiet_wind, model='approx')
    assert approx.mean_cost == pytest.approx(exact.mean_cost, rel=1e-4)
    assert [info.cid for info in approx.constraints] == [info.cid for info in exact.constraints]


def test_chunking_does_not_matter(ieee14_wind, wdro_solution, laplace_samples):
    """Verify the report is the same however the trials are split"""

    strategy, _ = wdro_solution
    whole = evaluate_strategy(ieee14_wind, strategy, laplace_samples, model='approx')
    pieces = evaluate_strategy(ieee14_wind, strategy, laplace_samples, model='approx', chunk_size=7)
    assert_allclose(pieces.reliabilities, whole.reliabilities)
    assert pieces.mean_cost == pytest.approx(whole.mean_cost, rel=1e-12)
    assert_allclose(pieces.reserve_usage.counts, whole.reserve_usage.counts)
    assert int(whole.reserve_usage.counts.sum()) == laplace_samples.n_samples


def test_report_tables(ieee14_wind, wdro_solution, laplace_samples):
    """Verify the summary, the reliability table and the histograms"""

    strategy, _ = wdro_solution
    report = evaluate_strategy(ieee14_wind, strategy, laplace_samples, model='approx')
    summary = report.summary()
    assert summary['trials'] == 200
    assert summary['lowest_reliability'] == pytest.approx(float(report.reliabilities.min()))
    assert summary['standard_error'] == pytest.approx(np.sqrt(0.25 / 200))

    frame = report.reliability_frame()
    assert list(frame.columns) == ['constraint', 'kind', 'lower', 'upper', 'reliability']
    assert len(frame) == len(report.constraints)
    assert set(frame['kind']) == {'reserve', 'voltage', 'reactive', 'flow'}

    assert set(report.histograms) == {'voltage', 'reactive', 'flow'}
    flow = report.histograms['flow'].to_frame()
    assert list(flow.columns) == ['bin_low', 'bin_high', 'count']
    # flows are reported in MW, the rating is 40 MW
    assert flow['bin_low'].iloc[0] == pytest.approx(-60.0)


def test_evaluation_errors(ieee14_wind, wdro_solution, laplace_samples):
    """Verify unknown models and mismatched samples are refused"""

    strategy, _ = wdro_solution
    with pytest.raises(ValueError, match='unknown model'):
        evaluate_strategy(ieee14_wind, strategy, laplace_samples, model='exact')
    with pytest.raises(ValueError, match='2 columns'):
        evaluate_strategy(ieee14_wind, strategy, SampleSet.from_array(np.zeros((5, 2))))


def test_dc_checks_reserve_and_flows(ieee14_wind, wdro_solution):
    """Verify the DC model leaves voltages and reactive outputs unchecked"""

    strategy, _ = wdro_solution
    evaluator = ModelEvaluator.build(ieee14_wind, strategy, 'dc')
    assert {info.kind for info in evaluator.constraints} == {'reserve', 'flow'}
    assert len(evaluator.positions('flow')) == 20


@pytest.mark.parametrize("lower, upper, first, last", [
    (-0.4, 0.4, -0.6, 0.6),
    (0.9, 1.1, 0.85, 1.15),
    (-np.inf, np.inf, -15.0, 15.0),
])
def test_histogram_edges(lower, upper, first, last):
    """Verify bins span the limits with a quarter of the span on each side"""

    edges = ConstraintInfo('flow:1-2#0', 'flow', lower, upper).edges(bins=10)
    assert len(edges) == 11
    assert edges[0] == pytest.approx(first)
    assert edges[-1] == pytest.approx(last)
