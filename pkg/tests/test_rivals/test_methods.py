"""
A test module for the wdro_opf.rivals.methods module
"""

import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from wdro_opf.chance import RhoLevels, reserve_quantity
from wdro_opf.opfcore import OpfSettings
from wdro_opf.rivals import MethodConfig, moment_margin, moment_sizer, ro_sizer
from wdro_opf.wasserstein import SampleSet


@pytest.mark.parametrize("rho, method, expected", [
    (0.05, 'mdro', math.sqrt(20.0)),
    (0.25, 'mdro', 2.0),
    (0.05, 'gsp', 1.959964),
    (0.1, 'gsp', 1.644854),
])
def test_moment_margin(rho, method, expected):
    """Verify the Chebyshev and Gaussian margins"""

    assert moment_margin(rho, method) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("rho, method, message", [
    (0.0, 'mdro', 'rho must lie'),
    (1.0, 'gsp', 'rho must lie'),
    (0.05, 'ro', 'no moment margin'),
])
def test_moment_margin_errors(rho, method, message):
    """Verify margins are only given for a probability and a moment method"""

    with pytest.raises(ValueError, match=message):
        moment_margin(rho, method)


@pytest.mark.parametrize("kwargs, message", [
    ({'method': 'saa'}, 'unknown method'),
    ({'method': 'mdro', 'settings': OpfSettings(rho=RhoLevels(reserve=1.0))}, 'needs every rho'),
    ({'cut_rounds': 0}, 'cut_rounds'),
])
def test_config_validation(kwargs, message):
    """Verify configurations that can't be solved are refused"""

    with pytest.raises(ValueError, match=message):
        MethodConfig(**kwargs)


def test_config_tags_settings():
    """Verify the settings carry the method name and RO accepts ρ = 1"""

    config = MethodConfig(method='ro', settings=OpfSettings(rho=RhoLevels(reserve=1.0)))
    assert config.opf_settings.method == 'ro'
    assert config.opf_settings.rho.reserve == 1.0


def test_moment_sizer_reserve(ieee14_wind, laplace_samples):
    """Verify the reserve interval is the mean plus or minus k deviations of ω"""

    quantity = reserve_quantity(ieee14_wind)
    projected = laplace_samples.project(quantity.projection)
    result, box = moment_sizer('mdro')(quantity, projected, 0.05)
    spread = math.sqrt(20.0) * float(projected.sqrt_cov[0, 0])
    mean = float(projected.mean[0])
    assert result.sigma == pytest.approx(math.sqrt(20.0))
    assert_allclose(box.vertices.ravel(), [mean - spread, mean + spread])


def test_ro_sizer_covers_the_samples():
    """Verify the robust set is the whole support box"""

    samples = SampleSet.from_array(np.random.default_rng(11).normal(size=(100, 1)))
    result, box = ro_sizer(6.0)(None, samples, 0.05)
    assert result.sigma == 6.0
    assert box.vertices.min() < samples.data.min()
    assert box.vertices.max() > samples.data.max()
