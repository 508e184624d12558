"""
With the affine AGC policy every unit produces p_i − ωα_i, ω = 1ᵀζ, so the
cost of a strategy is a quadratic in the total forecast error

    η(ω) = c₂ω² − c₁ω + c₀
    c₂ = Σ c_{i2}α_i²,  c₁ = Σ (2c_{i2}p_iα_i + c_{i1}α_i),
    c₀ = Σ (c_{i2}p_i² + c_{i1}p_i + c_{i0}) + c̄ᵀr̄ + c̲ᵀr̲

Over the Wasserstein ball of radius ε around the samples ω̂_k with support
[ω̲, ω̄], the worst-case expectation of η is

    inf_{λ≥0} λε + (1/N) Σ_k max{η(ω̲) + λ(ω̲ − ω̂_k), η(ω̄) − λ(ω̄ − ω̂_k), η(ω̂_k)}

and fixing λ at max{η′(ω̄), −η′(ω̲)} gives the upper bound

    λε + (1/N) Σ_k η(ω̂_k)

whose size doesn't depend on N, since the average only needs the first two
sample moments of ω̂.
"""

from dataclasses import dataclass
import logging
from typing import TYPE_CHECKING, Tuple

import numpy as np

from wdro_opf.case_io import Network
from wdro_opf.wasserstein import SampleSet, build_ambiguity
from wdro_opf.wasserstein.sample_set import SIGMA_MAX

if TYPE_CHECKING:
    from wdro_opf.opfcore.strategy import OperatingStrategy


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

EXACT_ITERATIONS = 60


@dataclass(frozen=True)
class CostAggregate:
    """The coefficients of η(ω) = c₂ω² − c₁ω + c₀"""

    c2: float
    c1: float
    c0: float

    def __post_init__(self):
        if self.c2 < 0:
            raise ValueError(f'the quadratic coefficient must be non-negative, got {self.c2}')

    def eta(self, omega):
        """The cost at total error omega (element-wise on arrays)"""

        return self.c2 * omega * omega - self.c1 * omega + self.c0

    def slope(self, omega):
        """η′(omega)"""

        return 2.0 * self.c2 * omega - self.c1


@dataclass(frozen=True, eq=False)
class OmegaSamples:
    """Samples of the total forecast error with their support and radius.

    Attributes:
        values: The ω̂_k.
        lower: ω̲.
        upper: ω̄.
        epsilon: Radius of the Wasserstein ball of ω.
    """

    values: np.ndarray
    lower: float
    upper: float
    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f'epsilon must be non-negative, got {self.epsilon}')
        if len(self.values) and not self.lower <= self.values.min() <= self.values.max() <= self.upper:
            raise ValueError('every sample must lie inside the support')

    @classmethod
    def from_samples(
            cls,
            samples: SampleSet,
            beta: float = 0.9,
            sigma_max: float = SIGMA_MAX,
            fallback: bool = False,
    ) -> 'OmegaSamples':
        """Project forecast errors onto their total and build its ball.

        The support interval is widened to the sample range when a sample lies
        outside the σ_max box.

        Args:
            samples: Forecast errors, one column per wind farm.
            beta: Confidence of the ball.
            sigma_max: Half side of the standardized support.
            fallback: Size the ball from the support diameter.
        """

        projected = samples.project(np.ones(samples.dim), labels=['omega'])
        spec = build_ambiguity(projected, beta=beta, sigma_max=sigma_max, fallback=fallback)
        values = projected.data[:, 0]
        lower = min(float(spec.support.lower[0]), float(values.min()))
        upper = max(float(spec.support.upper[0]), float(values.max()))
        return cls(values=values, lower=lower, upper=upper, epsilon=spec.epsilon)

    @property
    def m1(self) -> float:
        """Mean of ω̂"""

        return float(np.mean(self.values))

    @property
    def m2(self) -> float:
        """Mean of ω̂²"""

        return float(np.mean(self.values * self.values))

    def sample_average(self, agg: CostAggregate) -> float:
        """(1/N) Σ η(ω̂_k) through the two moments"""

        return agg.c2 * self.m2 - agg.c1 * self.m1 + agg.c0


def cost_coeffs(net: Network, strategy: 'OperatingStrategy') -> CostAggregate:
    """Aggregate the generator and reserve costs of a strategy into η.

    Args:
        net: The network, for the cost curves and reserve prices.
        strategy: The nominal outputs, participation factors and reserves.
    """

    costs = np.array([gen.cost for gen in net.generators], dtype=float).reshape(-1, 3)
    c_quad, c_lin, c_const = costs[:, 0], costs[:, 1], costs[:, 2]
    pg, alpha = strategy.pg, strategy.alpha
    reserve = (
        net.array('generators', 'reserve_up_price') @ strategy.r_up
        + net.array('generators', 'reserve_down_price') @ strategy.r_dn
    )
    return CostAggregate(
        c2=float(np.sum(c_quad * alpha * alpha)),
        c1=float(np.sum(2.0 * c_quad * pg * alpha + c_lin * alpha)),
        c0=float(np.sum(c_quad * pg * pg + c_lin * pg + c_const) + reserve),
    )


def _exact_terms(agg: CostAggregate, samples: OmegaSamples, lam: float) -> Tuple[float, float]:
    """The value and a subgradient (in λ) of the exact dual function"""

    omega = samples.values
    low_term = agg.eta(samples.lower) + lam * (samples.lower - omega)
    high_term = agg.eta(samples.upper) - lam * (samples.upper - omega)
    mid_term = agg.eta(omega)
    stacked = np.vstack([low_term, high_term, mid_term])
    active = np.argmax(stacked, axis=0)
    slopes = np.choose(active, [samples.lower - omega, omega - samples.upper, np.zeros_like(omega)])
    value = lam * samples.epsilon + float(np.mean(stacked.max(axis=0)))
    return value, samples.epsilon + float(np.mean(slopes))


def worst_case_cost_exact(agg: CostAggregate, samples: OmegaSamples) -> Tuple[float, float]:
    """The exact worst-case expected cost over the ball and its minimizing λ.

    The dual function is convex and piecewise linear in λ, and for λ beyond the
    upper-bound multiplier every sample picks η(ω̂_k), so the minimizer lies in
    [0, λ_ub]. Bisection on the sign of a subgradient narrows that interval.

    Args:
        agg: The cost coefficients.
        samples: The ω samples with their support and radius.
    """

    _, lam_ub = worst_case_cost_ub(agg, samples)
    if samples.epsilon == 0:
        return samples.sample_average(agg), lam_ub
    low, high = 0.0, max(lam_ub, 0.0)
    for _ in range(EXACT_ITERATIONS):
        if high - low <= 1e-12 * max(1.0, high):
            break
        mid = 0.5 * (low + high)
        _, grad = _exact_terms(agg, samples, mid)
        if grad > 0:
            high = mid
        else:
            low = mid
    candidates = [(_exact_terms(agg, samples, lam)[0], lam) for lam in (0.0, low, high, lam_ub)]
    value, lam = min(candidates)
    return value, lam


def worst_case_cost_ub(agg: CostAggregate, samples: OmegaSamples) -> Tuple[float, float]:
    """The upper bound λε + (1/N)Σ η(ω̂_k) with λ = max{η′(ω̄), −η′(ω̲)}.

    Returns:
        (value, λ)
    """

    lam = max(agg.slope(samples.upper), -agg.slope(samples.lower))
    return lam * samples.epsilon + samples.sample_average(agg), float(lam)


@dataclass(frozen=True)
class ObjectiveReport:
    """The objective of a strategy measured three ways.

    Attributes:
        bound: The upper bound the solver minimizes.
        exact: The exact worst-case expectation.
        sample_average: The empirical average cost.
        multiplier: λ of the upper bound.
    """

    bound: float
    exact: float
    sample_average: float
    multiplier: float

    @property
    def gap(self) -> float:
        """Relative excess of the bound over the exact value"""

        if self.exact == 0:
            return 0.0
        return (self.bound - self.exact) / abs(self.exact)


def objective_report(agg: CostAggregate, samples: OmegaSamples) -> ObjectiveReport:
    """Evaluate the bound, the exact value and the sample average of η"""

    bound, lam = worst_case_cost_ub(agg, samples)
    exact, _ = worst_case_cost_exact(agg, samples)
    # the bound is attained by a feasible λ, so it can't be below the infimum
    exact = min(exact, bound)
    return ObjectiveReport(
        bound=bound, exact=exact, sample_average=samples.sample_average(agg), multiplier=lam,
    )
