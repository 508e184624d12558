"""
This module sizes the standardized hypercube V(σ) = [−σ, σ]^m. Over every
distribution within Wasserstein distance ε of the empirical one, the
probability of landing outside V(σ) is at most

    inf_{λ≥0} h(σ, λ),   h(σ, λ) = λε + (1/N) Σ_k (1 − λ(σ − d_k)⁺)⁺

with d_k the ℓ∞ norm of the k-th standardized sample. For a fixed σ, h is convex
and piecewise linear in λ with breakpoints at λ_k = 1/(σ − d_k), so its
infimum is found exactly by evaluating h at λ = 0 and at every breakpoint. The
smallest σ whose bound is at most ρ comes from bisection on [0, σ_max].
"""

from dataclasses import dataclass
import logging

import numpy as np

from wdro_opf.chance import HypercubeInfeasible
from wdro_opf.wasserstein import AmbiguityError
from wdro_opf.wasserstein.sample_set import SIGMA_MAX


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

BISECTION_TOL = 1e-4


def violation_bound(sigma: float, lam: float, d: np.ndarray, epsilon: float) -> float:
    """h(σ, λ) evaluated directly from its definition"""

    d = np.asarray(d, dtype=float)
    inner = np.maximum(1.0 - lam * np.maximum(sigma - d, 0.0), 0.0)
    return float(lam * epsilon + inner.mean())


class _SortedDistances:
    """The d_k sorted once, with prefix sums, so every σ is evaluated in O(N)
    without sorting again.
    """

    def __init__(self, d: np.ndarray):
        self.d = np.sort(np.asarray(d, dtype=float))
        self.prefix = np.concatenate([[0.0], np.cumsum(self.d)])
        self.n = len(self.d)

    def minimize(self, sigma: float, epsilon: float):
        """Return (inf_λ h(σ, λ), the minimizing λ)"""

        n_inside = int(np.searchsorted(self.d, sigma, side='left'))
        outside = (self.n - n_inside) / self.n
        if n_inside == 0:
            return 1.0, 0.0
        # at λ_j = 1/(σ − d_j) the samples 0..j no longer count
        lam = 1.0 / (sigma - self.d[:n_inside])
        j = np.arange(n_inside)
        remaining = n_inside - 1 - j
        remaining_sum = self.prefix[n_inside] - self.prefix[j + 1]
        values = lam * epsilon + (remaining - lam * (remaining * sigma - remaining_sum)) / self.n + outside
        best = int(np.argmin(values))
        if values[best] < 1.0:
            return float(max(values[best], 0.0)), float(lam[best])
        return 1.0, 0.0


def worst_case_violation(sigma: float, d: np.ndarray, epsilon: float) -> float:
    """The worst-case probability, over the Wasserstein ball of radius epsilon, of
    a standardized sample falling outside [−σ, σ]^m.

    Args:
        sigma: Half side of the hypercube.
        d: ℓ∞ norms of the standardized samples.
        epsilon: Radius of the ball.
    """

    if sigma < 0 or epsilon < 0:
        raise AmbiguityError(f'sigma and epsilon must be non-negative, got {sigma} and {epsilon}')
    return _SortedDistances(d).minimize(sigma, epsilon)[0]


@dataclass(frozen=True)
class HypercubeResult:
    """The smallest safe hypercube of one chance constraint.

    Attributes:
        sigma: Half side σ* in standardized coordinates.
        multiplier: The λ* certifying the bound at σ*.
        level: The worst-case violation probability at σ*.
        epsilon: The radius the cube was sized for.
        rho: The allowed violation probability.
    """

    sigma: float
    multiplier: float
    level: float
    epsilon: float
    rho: float


# pylint: disable=too-many-arguments
def min_sigma(
        d: np.ndarray,
        epsilon: float,
        rho: float,
        sigma_max: float = SIGMA_MAX,
        tol: float = BISECTION_TOL,
        quantity: str = 'constraint',
) -> HypercubeResult:
    """Find the smallest σ whose worst-case violation is at most rho.

    The bracket [σ̲, σ̄] starts at [0, σ_max] and is halved until it is narrower
    than tol; σ̄ is returned, so the result is always certified.

    Args:
        d: ℓ∞ norms of the standardized samples.
        epsilon: Radius of the Wasserstein ball.
        rho: Allowed violation probability in (0, 1].
        sigma_max: Largest allowed σ, the half side of the support box.
        tol: Width of the final bracket.
        quantity: Name of the constrained quantity, for messages.
    """

    if not 0 < rho <= 1:
        raise AmbiguityError(f'rho must lie in (0, 1], got {rho}')
    if epsilon < 0:
        raise AmbiguityError(f'epsilon must be non-negative, got {epsilon}')
    sorted_d = _SortedDistances(d)

    level, lam = sorted_d.minimize(0.0, epsilon)
    if level <= rho:
        return HypercubeResult(sigma=0.0, multiplier=lam, level=level, epsilon=epsilon, rho=rho)
    top_level, top_lam = sorted_d.minimize(sigma_max, epsilon)
    if top_level > rho:
        raise HypercubeInfeasible(quantity, top_level, rho)

    low, high = 0.0, float(sigma_max)
    level, lam = top_level, top_lam
    iterations = 0
    while high - low > tol:
        mid = 0.5 * (low + high)
        mid_level, mid_lam = sorted_d.minimize(mid, epsilon)
        if mid_level <= rho:
            high, level, lam = mid, mid_level, mid_lam
        else:
            low = mid
        iterations += 1
    LOGGER.debug('%s: sigma* = %.5f (level %.5f) after %d bisections', quantity, high, level, iterations)
    return HypercubeResult(sigma=high, multiplier=lam, level=level, epsilon=epsilon, rho=rho)
