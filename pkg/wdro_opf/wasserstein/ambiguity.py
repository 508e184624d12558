"""
This module sizes the Wasserstein ball around the empirical distribution. The
radius shrinks with the number of samples as

    ε(N) = C·sqrt(ln(1/(1−β)) / N)

where β is the confidence that the ball holds the true distribution and C is a
constant of the light-tailed data, estimated as

    C = 2·inf_{α>0} sqrt( (1/(2α)) (1 + ln( (1/N) Σ_k exp(α‖ξ̂^(k) − μ̂‖₁²) )) )

The older choice C = √2·D, with D the ℓ1 diameter of the support, is kept as a
fallback; it is never smaller than the estimate.
"""

from dataclasses import dataclass
import logging
import math
import time

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from wdro_opf.wasserstein import AmbiguityError
from wdro_opf.wasserstein.sample_set import SIGMA_MAX, SampleSet, SupportBox, estimate_support, l1_diameter


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

C_FLOOR = 1e-12
LOG_ALPHA_RANGE = (math.log(1e-6), math.log(1e6))
PRESCAN_POINTS = 61
C_RTOL = 1e-6


def _normalized_objective(log_a: float, scaled: np.ndarray) -> float:
    """(1/(2a))(1 + ln mean exp(a·s)) for scaled distances s with max(s) = 1"""

    a = math.exp(log_a)
    return (1.0 + logsumexp(a * scaled) - math.log(len(scaled))) / (2.0 * a)


def estimate_C(samples: SampleSet) -> float:  # pylint: disable=invalid-name
    """Estimate the light-tail constant C of the samples.

    The squared distances are divided by their maximum first, which makes the
    search over α independent of the scale of the data. A coarse scan over
    log α in [1e-6, 1e6] brackets the minimum and a bounded golden-section
    search refines it. The objective decreases to 1/2 as α grows without bound,
    so that limit also takes part in the infimum.

    Args:
        samples: The empirical sample set.
    """

    dist_sq = np.sum(np.abs(samples.data - samples.mean), axis=1) ** 2
    s_max = float(dist_sq.max())
    if s_max <= 0:
        LOGGER.warning('All %d samples are identical, C set to its floor %.1e', samples.n_samples, C_FLOOR)
        return C_FLOOR
    scaled = dist_sq / s_max

    grid = np.linspace(*LOG_ALPHA_RANGE, PRESCAN_POINTS)
    values = np.array([_normalized_objective(log_a, scaled) for log_a in grid])
    best = int(np.argmin(values))
    low = grid[max(best - 1, 0)]
    high = grid[min(best + 1, len(grid) - 1)]
    result = optimize.minimize_scalar(
        _normalized_objective, bounds=(low, high), args=(scaled,), method='bounded',
        options={'xatol': C_RTOL * 1e-3},
    )
    value = min(float(result.fun), float(values[best]), 0.5)
    c_value = 2.0 * math.sqrt(s_max * value)
    LOGGER.debug('Estimated C = %.6g (alpha = %.3e) from %d samples', c_value, math.exp(result.x) / s_max, samples.n_samples)
    if c_value < C_FLOOR:
        LOGGER.warning('Estimated C %.3e is below the floor, using %.1e', c_value, C_FLOOR)
        return C_FLOOR
    return c_value


def radius(
        n_samples: int,
        beta: float,
        c_value: float = None,
        fallback: bool = False,
        diameter: float = None,
) -> float:
    """The Wasserstein radius ε(N).

    Args:
        n_samples: N, the number of samples.
        beta: Confidence level in (0, 1).
        c_value: The constant C of the light-tailed formula.
        fallback: Use ε = D·sqrt(2·ln(1/(1−β))/N) instead.
        diameter: D, the ℓ1 diameter of the support, needed with fallback.
    """

    if not 0 < beta < 1:
        raise AmbiguityError(f'beta must lie in (0, 1), got {beta}')
    if n_samples < 1:
        raise AmbiguityError(f'at least one sample is needed, got {n_samples}')
    log_term = math.log(1.0 / (1.0 - beta))
    if fallback:
        if diameter is None:
            raise AmbiguityError('the diameter fallback needs the support diameter')
        return diameter * math.sqrt(2.0 * log_term / n_samples)
    if c_value is None or c_value < 0:
        raise AmbiguityError(f'C must be a non-negative number, got {c_value}')
    return c_value * math.sqrt(log_term / n_samples)


@dataclass(frozen=True, eq=False)
class AmbiguitySpec:
    """A Wasserstein ball with the ℓ1 transport cost.

    Attributes:
        epsilon: The radius.
        beta: Confidence that the ball holds the true distribution.
        c_value: The constant C the radius was computed from.
        support: The estimated box support.
        n_samples: N.
        fallback: The radius came from the √2·D formula.
        norm: The ground norm of the transport cost.
    """

    epsilon: float
    beta: float
    c_value: float
    support: SupportBox
    n_samples: int
    fallback: bool = False
    norm: str = 'l1'


def build_ambiguity(
        samples: SampleSet,
        beta: float = 0.9,
        sigma_max: float = SIGMA_MAX,
        fallback: bool = False,
) -> AmbiguitySpec:
    """Estimate the support, C and the radius of one sample set.

    Args:
        samples: The (usually projected) empirical sample set.
        beta: Confidence level of the ball.
        sigma_max: Half side of the standardized support box.
        fallback: Size the ball with C = √2·D, D the ℓ1 diameter of the support.
    """

    start = time.perf_counter()
    support = estimate_support(samples, sigma_max)
    if fallback:
        diameter = l1_diameter(support.vertices)
        c_value = math.sqrt(2.0) * diameter
        LOGGER.warning('Sizing the ambiguity set of %s with the support diameter %.4g', samples.labels, diameter)
        epsilon = radius(samples.n_samples, beta, fallback=True, diameter=diameter)
    else:
        c_value = estimate_C(samples)
        epsilon = radius(samples.n_samples, beta, c_value)
    LOGGER.debug(
        'Ambiguity set of %s: N=%d C=%.6g epsilon=%.6g in %.3fs',
        samples.labels, samples.n_samples, c_value, epsilon, time.perf_counter() - start,
    )
    return AmbiguitySpec(
        epsilon=epsilon, beta=beta, c_value=c_value, support=support,
        n_samples=samples.n_samples, fallback=fallback,
    )
