"""
A test module for the wdro_opf.simlab.accuracy module
"""

from numpy.testing import assert_allclose
import pytest

from wdro_opf.simlab import error_profile, model_accuracy_report


def test_error_profile(ieee14_wind, two_bus):
    """Verify a total error is spread over the farms by capacity"""

    assert_allclose(error_profile(ieee14_wind, 0.2), [0.05, 0.05, 0.05, 0.05])
    assert_allclose(error_profile(two_bus, -0.1), [-0.1])


def test_tables(ieee14_wind, wdro_solution):
    """Verify the four tables and that the approximate model is exact at zero error"""

    strategy, _ = wdro_solution
    tables = model_accuracy_report(ieee14_wind, strategy, [0.0, -0.1])
    assert set(tables) == {'cost', 'voltage', 'reactive', 'flow'}
    cost = tables['cost']
    assert list(cost['level_mw']) == pytest.approx([0.0, -10.0])
    assert cost['approx_error_pct'].iloc[0] == pytest.approx(0.0, abs=1e-3)

    voltage = tables['voltage']
    at_zero = voltage[voltage['level_mw'] == 0.0]
    assert len(at_zero) == 9
    assert at_zero['approx_error'].abs().max() < 1e-4

    flow = tables['flow']
    assert {'full_ac', 'approx', 'lpf', 'dc', 'dc_error'} <= set(flow.columns)
    assert len(flow) == 2 * 20
