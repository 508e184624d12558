"""
A test module for the wdro_opf.chance.hypercube module
"""

import numpy as np
import pytest

from wdro_opf.chance import HypercubeInfeasible, min_sigma, violation_bound, worst_case_violation
from wdro_opf.wasserstein import AmbiguityError


def _breakpoint_minimum(sigma, d, epsilon):
    """inf over λ of h(σ, λ): h is piecewise linear in λ, so its infimum is at
    λ = 0 or at a breakpoint 1/(σ − d_k)
    """

    candidates = [0.0] + [1.0 / (sigma - value) for value in d if value < sigma]
    return min(violation_bound(sigma, lam, d, epsilon) for lam in candidates)


def test_worst_case_violation_matches_definition():
    """Verify the closed form against the definition on random instances"""

    rng = np.random.default_rng(17)
    for _ in range(50):
        d = np.abs(rng.standard_normal(rng.integers(5, 60)))
        sigma = rng.uniform(0.0, 4.0)
        epsilon = rng.uniform(0.0, 0.5)
        value = worst_case_violation(sigma, d, epsilon)
        assert value == pytest.approx(_breakpoint_minimum(sigma, d, epsilon), abs=1e-9)
        grid = np.linspace(0.0, 50.0, 501)
        assert min(violation_bound(sigma, lam, d, epsilon) for lam in grid) >= value - 1e-9


def test_worst_case_violation_edges():
    """Verify a cube that holds no sample is violated with certainty and that
    bad inputs are refused
    """

    d = np.array([0.5, 1.0, 2.0])
    assert worst_case_violation(0.0, d, 0.1) == 1.0
    assert worst_case_violation(0.4, d, 0.0) == 1.0
    assert worst_case_violation(3.0, d, 0.0) == 0.0
    with pytest.raises(AmbiguityError):
        worst_case_violation(-1.0, d, 0.1)
    with pytest.raises(AmbiguityError):
        worst_case_violation(1.0, d, -0.1)


def test_monotone_in_sigma_and_epsilon():
    """Verify a bigger cube never has a larger violation and a bigger ball
    never a smaller one
    """

    d = np.abs(np.random.default_rng(4).standard_normal(100))
    sigmas = np.linspace(0.0, 5.0, 51)
    levels = [worst_case_violation(sigma, d, 0.05) for sigma in sigmas]
    assert all(later <= earlier + 1e-12 for earlier, later in zip(levels, levels[1:]))
    assert worst_case_violation(1.5, d, 0.2) >= worst_case_violation(1.5, d, 0.05)


@pytest.mark.parametrize("epsilon, rho", [(0.01, 0.05), (0.05, 0.1), (0.0, 0.2)])
def test_min_sigma_is_certified_and_tight(epsilon, rho):
    """Verify σ* meets ρ and nothing noticeably smaller does"""

    d = np.abs(np.random.default_rng(9).standard_normal(300))
    result = min_sigma(d, epsilon, rho, tol=1e-4)
    assert result.level <= rho
    assert worst_case_violation(result.sigma, d, epsilon) <= rho
    assert worst_case_violation(max(result.sigma - 2e-4, 0.0), d, epsilon) > rho
    assert result.epsilon == epsilon and result.rho == rho


def test_min_sigma_without_ball_is_the_quantile():
    """Verify that with ε = 0 the cube is the empirical (1 − ρ) quantile"""

    d = np.abs(np.random.default_rng(12).standard_normal(200))
    result = min_sigma(d, 0.0, 0.1, tol=1e-5)
    quantile = np.sort(d)[200 - 20 - 1]
    assert quantile < result.sigma <= quantile + 1e-3
    assert result.level == pytest.approx(0.1)


def test_min_sigma_whole_probability():
    """Verify ρ = 1 needs no cube at all"""

    result = min_sigma(np.array([0.3, 0.7]), 0.1, 1.0)
    assert result.sigma == 0.0


def test_min_sigma_infeasible():
    """Verify a ball too large for the support box is reported"""

    with pytest.raises(HypercubeInfeasible) as info:
        min_sigma(np.array([0.1, 0.2, 0.3]), 10.0, 0.05, sigma_max=10.0, quantity='flow:1-2#0')
    assert info.value.quantity == 'flow:1-2#0'
    assert info.value.level > 0.05


@pytest.mark.parametrize("rho", [0.0, -0.1, 1.5])
def test_min_sigma_rho_range(rho):
    """Verify ρ must lie in (0, 1]"""

    with pytest.raises(AmbiguityError):
        min_sigma(np.array([0.1, 0.2]), 0.0, rho)
