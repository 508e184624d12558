"""
This module describes the benchmark methods and how each one sizes the
uncertainty set of a monitored quantity.

RO takes the corners of the support box, which is the hypercube of half side
σ_max. MDRO and GSP bound the random term of a quantity by its mean plus or
minus k standard deviations, with k from the Chebyshev inequality or from the
standard normal quantile. For the reserve, whose random term ω·α_i has a known
sign per unit, that interval is a fixed pair of vertices. The other quantities
get second-order cone margins, which the cutting-plane loop adds as it goes, so
their set here is only the mean.
"""

from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np
from scipy.stats import norm

from wdro_opf.chance import HypercubeResult, MonitoredQuantity, UncertaintySet
from wdro_opf.chance.sizing import Sizer
from wdro_opf.costdro import OmegaSamples
from wdro_opf.opfcore import OpfSettings
from wdro_opf.wasserstein import SampleSet, SupportBox, estimate_support
from wdro_opf.wasserstein.sample_set import SIGMA_MAX


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

METHODS = ('wdro', 'ro', 'mdro', 'gsp', 'dc')
MOMENT_METHODS = ('mdro', 'gsp')
CUT_ROUNDS = 50
CUT_TOL = 1e-6


@dataclass(frozen=True)
class MethodConfig:
    """One formulation with its settings.

    Attributes:
        method: One of METHODS.
        settings: ρ levels, β, σ_max and the enforcement settings.
        cut_rounds: Round limit of the cutting-plane loop.
        cut_tol: Largest margin violation the cutting-plane loop accepts.
    """

    method: str = 'wdro'
    settings: OpfSettings = field(default_factory=OpfSettings)
    cut_rounds: int = CUT_ROUNDS
    cut_tol: float = CUT_TOL

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f'unknown method "{self.method}", expected one of {", ".join(METHODS)}')
        if self.method != 'ro':
            for rho in self.settings.rho.as_tuple():
                if not 0 < rho < 1:
                    raise ValueError(f'{self.method} needs every rho in (0, 1), got {rho}')
        if self.cut_rounds < 1:
            raise ValueError(f'cut_rounds must be positive, got {self.cut_rounds}')

    @property
    def opf_settings(self) -> OpfSettings:
        """The settings, tagged with the method"""

        return replace(self.settings, method=self.method)


def moment_margin(rho: float, method: str) -> float:
    """How many standard deviations the random term may reach.

    Args:
        rho: Allowed violation probability in (0, 1).
        method: 'mdro' for the Chebyshev bound sqrt(1/ρ), 'gsp' for the
            Gaussian quantile Φ⁻¹(1 − ρ/2).
    """

    if not 0 < rho < 1:
        raise ValueError(f'rho must lie in (0, 1), got {rho}')
    if method == 'mdro':
        return math.sqrt(1.0 / rho)
    if method == 'gsp':
        return float(norm.ppf(1.0 - rho / 2.0))
    raise ValueError(f'no moment margin for method "{method}"')


def ro_vertices(support: SupportBox) -> UncertaintySet:
    """The corners of the support box as the uncertainty set"""

    return UncertaintySet(
        vertices=support.vertices, sigma=support.sigma_max, mean=support.mean, sqrt_cov=support.sqrt_cov,
    )


def ro_sizer(sigma_max: float = SIGMA_MAX) -> Sizer:
    """Size every quantity with the whole support box"""

    def size(quantity: MonitoredQuantity, projected: SampleSet, rho: float):  # pylint: disable=unused-argument
        result = HypercubeResult(sigma=float(sigma_max), multiplier=0.0, level=0.0, epsilon=0.0, rho=rho)
        return result, ro_vertices(estimate_support(projected, sigma_max))

    return size


def moment_sizer(method: str) -> Sizer:
    """The μ ± kσ interval for the reserve, the mean for everything else"""

    def size(quantity: MonitoredQuantity, projected: SampleSet, rho: float):
        margin = moment_margin(rho, method)
        mean = projected.mean
        if quantity.kind == 'reserve':
            spread = margin * float(projected.sqrt_cov[0, 0])
            vertices = np.array([[mean[0] - spread], [mean[0] + spread]])
        else:
            vertices = mean[None, :]
        result = HypercubeResult(sigma=margin, multiplier=0.0, level=rho, epsilon=0.0, rho=rho)
        return result, UncertaintySet(vertices=vertices, sigma=margin, mean=mean, sqrt_cov=projected.sqrt_cov)

    return size


def benchmark_omega(omega: OmegaSamples) -> OmegaSamples:
    """The same ω samples with a zero radius, so the cost is the sample average"""

    return replace(omega, epsilon=0.0)
