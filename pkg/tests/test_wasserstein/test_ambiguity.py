"""
A test module for the wdro_opf.wasserstein.ambiguity module
"""

import math

import numpy as np
import pytest
from scipy.special import logsumexp

from wdro_opf.wasserstein import AmbiguityError, SampleSet, build_ambiguity, estimate_C, radius
from wdro_opf.wasserstein.ambiguity import C_FLOOR


def _grid_c(data: np.ndarray) -> float:
    """C from a dense scan of α, as the definition states it"""

    dist_sq = np.sum(np.abs(data - data.mean(axis=0)), axis=1) ** 2
    alphas = np.logspace(-5, 5, 40001) / dist_sq.max()
    objective = (1.0 + logsumexp(np.outer(alphas, dist_sq), axis=1) - math.log(len(dist_sq))) / (2.0 * alphas)
    return 2.0 * math.sqrt(min(objective.min(), dist_sq.max() / 2.0))


@pytest.mark.parametrize("seed, scale", [(1, 1.0), (2, 0.01), (3, 50.0)])
def test_estimate_c(seed, scale):
    """Verify the estimate of C agrees with a dense scan of α"""

    rng = np.random.default_rng(seed)
    data = scale * rng.laplace(size=(150, 3))
    assert estimate_C(SampleSet.from_array(data)) == pytest.approx(_grid_c(data), rel=1e-4)


def test_estimate_c_bounded_by_spread():
    """Verify C never exceeds √2 times the largest ℓ1 deviation"""

    rng = np.random.default_rng(8)
    data = rng.standard_normal((200, 4))
    spread = np.sum(np.abs(data - data.mean(axis=0)), axis=1).max()
    assert estimate_C(SampleSet.from_array(data)) <= math.sqrt(2.0) * spread * (1 + 1e-9)


def test_identical_samples_floor():
    """Verify identical samples give the floor value of C"""

    assert estimate_C(SampleSet.from_array(np.ones((10, 2)))) == C_FLOOR


def test_radius_formula():
    """Verify both radius formulas"""

    assert radius(100, 0.9, c_value=2.0) == pytest.approx(2.0 * math.sqrt(math.log(10.0) / 100))
    assert radius(100, 0.9, fallback=True, diameter=3.0) == pytest.approx(
        3.0 * math.sqrt(2.0 * math.log(10.0) / 100)
    )
    assert radius(400, 0.9, c_value=2.0) == pytest.approx(radius(100, 0.9, c_value=2.0) / 2)


@pytest.mark.parametrize("kwargs", [
    {'n_samples': 10, 'beta': 0.0, 'c_value': 1.0},
    {'n_samples': 10, 'beta': 1.0, 'c_value': 1.0},
    {'n_samples': 0, 'beta': 0.9, 'c_value': 1.0},
    {'n_samples': 10, 'beta': 0.9},
    {'n_samples': 10, 'beta': 0.9, 'fallback': True},
])
def test_radius_errors(kwargs):
    """Verify a radius is refused for bad inputs"""

    with pytest.raises(AmbiguityError):
        radius(**kwargs)


def test_light_tail_radius_beats_diameter():
    """Verify the radius from the estimated C is smaller than the diameter one"""

    rng = np.random.default_rng(21)
    samples = SampleSet.from_array(rng.laplace(scale=0.05, size=(1000, 4)))
    light = build_ambiguity(samples, beta=0.9)
    heavy = build_ambiguity(samples, beta=0.9, fallback=True)
    assert light.epsilon < heavy.epsilon
    assert heavy.fallback and not light.fallback
    assert light.n_samples == 1000
    assert light.support.contains(samples.data).all()
