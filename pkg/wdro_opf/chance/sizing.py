"""
This module runs the preparation stage for a whole set of quantities: project
the forecast errors onto each quantity's (ω, t), build the ambiguity set of the
projection, size the hypercube and map it back. The quantities are independent,
so a thread pool can share the work.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import time
from typing import Callable, Dict, Iterable, Sequence, Tuple

from wdro_opf.chance.cache import UncertaintyCache
from wdro_opf.chance.hypercube import HypercubeResult, min_sigma
from wdro_opf.chance.robust import MonitoredQuantity, UncertaintySet, build_uncertainty_set
from wdro_opf.wasserstein import SampleSet, build_ambiguity
from wdro_opf.wasserstein.sample_set import SIGMA_MAX


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

Sizer = Callable[[MonitoredQuantity, SampleSet, float], Tuple[HypercubeResult, UncertaintySet]]


@dataclass(frozen=True)
class RhoLevels:
    """Allowed violation probabilities of the four constraint families"""

    reserve: float = 0.05
    voltage: float = 0.05
    reactive: float = 0.05
    flow: float = 0.05

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> 'RhoLevels':
        """One value for every family, or four in the order reserve, voltage,
        reactive, flow.
        """

        values = [float(value) for value in values]
        if len(values) == 1:
            values = values * 4
        if len(values) != 4:
            raise ValueError(f'expected 1 or 4 rho values, got {len(values)}')
        for value in values:
            if not 0 < value <= 1:
                raise ValueError(f'rho must lie in (0, 1], got {value}')
        return cls(*values)

    def for_kind(self, kind: str) -> float:
        """ρ of a quantity kind"""

        return getattr(self, kind)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        """(ρ₁, ρ₂, ρ₃, ρ₄)"""

        return (self.reserve, self.voltage, self.reactive, self.flow)


def wasserstein_sizer(beta: float = 0.9, sigma_max: float = SIGMA_MAX, fallback: bool = False) -> Sizer:
    """The data-driven sizing: ambiguity set of the projection, then the
    smallest safe hypercube.

    Args:
        beta: Confidence of the Wasserstein ball.
        sigma_max: Half side of the support box.
        fallback: Size the ball from the support diameter.
    """

    def size(quantity: MonitoredQuantity, projected: SampleSet, rho: float):
        spec = build_ambiguity(projected, beta=beta, sigma_max=sigma_max, fallback=fallback)
        result = min_sigma(projected.d, spec.epsilon, rho, sigma_max=sigma_max, quantity=quantity.qid)
        return result, build_uncertainty_set(result, projected.mean, projected.sqrt_cov)

    size.cache_tag = f'{"diameter" if fallback else "estimated"}/beta={beta}/sigma_max={sigma_max}'
    return size


# pylint: disable=too-many-arguments
def size_quantities(
        quantities: Iterable[MonitoredQuantity],
        samples: SampleSet,
        rho: RhoLevels,
        sizer: Sizer = None,
        cache: UncertaintyCache = None,
        jobs: int = 1,
        namespace: str = '',
) -> Dict[str, Tuple[HypercubeResult, UncertaintySet]]:
    """Size the uncertainty set of every quantity.

    Args:
        quantities: The monitored quantities.
        samples: Forecast error samples, one column per wind farm.
        rho: Violation probabilities per family.
        sizer: How to size one projection; the Wasserstein sizer by default.
        cache: Where to look up and store results.
        jobs: Number of worker threads.
        namespace: Prefix of the cache keys, one per sizing method. A sizer
            with a ``cache_tag`` attribute adds it to the prefix, so results
            of different radius rules never share an entry.
    """

    sizer = sizer or wasserstein_sizer()
    tag = getattr(sizer, 'cache_tag', '')
    if tag:
        namespace = f'{namespace}/{tag}' if namespace else tag
    quantities = list(quantities)
    start = time.perf_counter()

    def work(quantity: MonitoredQuantity):
        projected = samples.project(quantity.projection, labels=_projection_labels(quantity))
        level = rho.for_kind(quantity.kind)
        digest = projected.digest()
        if cache is not None:
            cached = cache.get(_cache_key(namespace, quantity.qid), digest, level)
            if cached is not None:
                return quantity.qid, digest, cached, True
        return quantity.qid, digest, sizer(quantity, projected, level), False

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(work, quantities))
    else:
        outcomes = [work(quantity) for quantity in quantities]

    sized = {}
    hits = 0
    for qid, digest, (result, uset), from_cache in outcomes:
        sized[qid] = (result, uset)
        if from_cache:
            hits += 1
        elif cache is not None:
            cache.put(_cache_key(namespace, qid), digest, result, uset)
    if cache is not None:
        if hits:
            LOGGER.info('Reused %d of %d uncertainty sets from the cache', hits, len(outcomes))
        if hits < len(outcomes):
            cache.save()
    LOGGER.info('Sized %d uncertainty sets in %.2fs', len(outcomes), time.perf_counter() - start)
    return sized


def _projection_labels(quantity: MonitoredQuantity):
    if quantity.dim == 1:
        return ['omega']
    return ['omega', quantity.qid]


def _cache_key(namespace: str, qid: str) -> str:
    return f'{namespace}/{qid}' if namespace else qid
