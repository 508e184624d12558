"""
This module draws wind forecast errors from a sampling protocol and reads and
writes them as CSV.

A protocol file is a JSON object

    {
        "distribution": "laplace",      # or "gaussian" or "mixture"
        "scale_fraction": 0.1,          # scale of every farm, share of its capacity
        "seed": 42,
        "correlation": [[1, 0.3], ...], # optional Gaussian copula across farms
        "wind_scale": 1.0,              # multiplies farm capacities and forecasts
        "mixture_weight": 0.1           # optional, share of the wide component
    }

The Laplace and Gaussian errors of a farm have the scale b = scale_fraction ·
capacity (the Gaussian standard deviation is b as well). The mixture draws the
Laplace error with probability 1 − mixture_weight and a Gaussian of standard
deviation 3b otherwise. Every error is clipped so that forecast + error stays
within [0, capacity].

Sample files have one column per wind farm, headed `wind@<bus>`, in MW.
"""

from dataclasses import dataclass
import json
import logging
import os
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from wdro_opf.case_io import WindFarm
from wdro_opf.simlab import ProtocolError
from wdro_opf.wasserstein import AmbiguityError, SampleSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

DISTRIBUTIONS = ('laplace', 'gaussian', 'mixture')
DEFAULT_SCALE_FRACTION = 0.1
DEFAULT_SEED = 42
DEFAULT_MIXTURE_WEIGHT = 0.1
MIXTURE_WIDTH = 3.0
UNIFORM_CLIP = 1e-15
PROTOCOL_KEYS = ('distribution', 'scale_fraction', 'seed', 'correlation', 'wind_scale', 'mixture_weight')


@dataclass(frozen=True, eq=False)
class RngProtocol:
    """How forecast errors are drawn.

    Attributes:
        distribution: One of DISTRIBUTIONS.
        scale_fraction: Scale of each farm's error as a share of its capacity.
        seed: Seed of the random generator.
        correlation: Correlation matrix of the Gaussian copula, None for
            independent farms.
        wind_scale: Factor on farm capacities and forecasts of the case.
        mixture_weight: Probability of the wide component of the mixture.
    """

    distribution: str
    scale_fraction: float = DEFAULT_SCALE_FRACTION
    seed: int = DEFAULT_SEED
    correlation: Optional[np.ndarray] = None
    wind_scale: float = 1.0
    mixture_weight: float = DEFAULT_MIXTURE_WEIGHT

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ProtocolError(
                f'unknown distribution "{self.distribution}", expected one of {", ".join(DISTRIBUTIONS)}'
            )
        if self.scale_fraction < 0:
            raise ProtocolError(f'scale_fraction must be non-negative, got {self.scale_fraction}')
        if self.wind_scale < 0:
            raise ProtocolError(f'wind_scale must be non-negative, got {self.wind_scale}')
        if not 0 <= self.mixture_weight <= 1:
            raise ProtocolError(f'mixture_weight must lie in [0, 1], got {self.mixture_weight}')
        if self.correlation is not None:
            corr = np.asarray(self.correlation, dtype=float)
            if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
                raise ProtocolError('correlation must be a square matrix')
            if not np.allclose(corr, corr.T) or not np.allclose(np.diag(corr), 1.0):
                raise ProtocolError('correlation must be symmetric with a unit diagonal')
            if np.linalg.eigvalsh(corr)[0] < -1e-10:
                raise ProtocolError('correlation must be positive semidefinite')
            object.__setattr__(self, 'correlation', corr)

    def as_dict(self) -> Dict:
        """The protocol as it would be written to a file"""

        document = {
            'distribution': self.distribution,
            'scale_fraction': self.scale_fraction,
            'seed': self.seed,
            'wind_scale': self.wind_scale,
            'mixture_weight': self.mixture_weight,
        }
        if self.correlation is not None:
            document['correlation'] = self.correlation.tolist()
        return document


def load_protocol(source: Union[str, Dict]) -> RngProtocol:
    """Read a protocol from a JSON file or from an already parsed dict.

    Raises:
        ProtocolError: when the file can't be read or a key is unknown or invalid.
    """

    if isinstance(source, dict):
        document = source
    else:
        try:
            with open(source, encoding='utf-8') as protocol_file:
                document = json.load(protocol_file)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProtocolError(f'cannot read protocol {source}: {exc}') from exc
    if not isinstance(document, dict) or 'distribution' not in document:
        raise ProtocolError('a protocol needs at least a "distribution"')
    unknown = set(document) - set(PROTOCOL_KEYS)
    if unknown:
        raise ProtocolError(f'unknown protocol keys {sorted(unknown)}')
    try:
        return RngProtocol(
            distribution=document['distribution'],
            scale_fraction=float(document.get('scale_fraction', DEFAULT_SCALE_FRACTION)),
            seed=int(document.get('seed', DEFAULT_SEED)),
            correlation=document.get('correlation'),
            wind_scale=float(document.get('wind_scale', 1.0)),
            mixture_weight=float(document.get('mixture_weight', DEFAULT_MIXTURE_WEIGHT)),
        )
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f'invalid protocol value: {exc}') from exc


def _uniforms(protocol: RngProtocol, rng: np.random.Generator, n_samples: int, n_farms: int) -> np.ndarray:
    if protocol.correlation is None:
        uniforms = rng.random((n_samples, n_farms))
    else:
        if protocol.correlation.shape != (n_farms, n_farms):
            raise ProtocolError(
                f'correlation is {protocol.correlation.shape[0]}x{protocol.correlation.shape[1]}, '
                f'the case has {n_farms} wind farms'
            )
        normal = rng.multivariate_normal(np.zeros(n_farms), protocol.correlation, size=n_samples, method='eigh')
        uniforms = stats.norm.cdf(normal)
    return np.clip(uniforms, UNIFORM_CLIP, 1.0 - UNIFORM_CLIP)


def generate_samples(protocol: RngProtocol, farms: Sequence[WindFarm], n_samples: int) -> SampleSet:
    """Draw n_samples forecast errors of the given farms.

    Args:
        protocol: How to draw.
        farms: The wind farms, with capacity and forecast in p.u.
        n_samples: Number of draws.

    Raises:
        ProtocolError: when n_samples is not positive or the correlation
            doesn't match the farms.
    """

    if n_samples < 1:
        raise ProtocolError(f'need at least one sample, got {n_samples}')
    n_farms = len(farms)
    rng = np.random.default_rng(protocol.seed)
    capacity = np.array([farm.capacity for farm in farms], dtype=float)
    forecast = np.array([farm.forecast for farm in farms], dtype=float)
    scales = protocol.scale_fraction * capacity

    uniforms = _uniforms(protocol, rng, n_samples, n_farms)
    if protocol.distribution == 'laplace':
        standard = stats.laplace.ppf(uniforms)
    elif protocol.distribution == 'gaussian':
        standard = stats.norm.ppf(uniforms)
    else:
        wide = rng.random((n_samples, n_farms)) < protocol.mixture_weight
        standard = np.where(wide, MIXTURE_WIDTH * stats.norm.ppf(uniforms), stats.laplace.ppf(uniforms))
    errors = np.clip(standard * scales, -forecast, capacity - forecast)

    clipped = np.count_nonzero(np.abs(errors - standard * scales) > 0)
    if clipped:
        LOGGER.info('Clipped %d of %d drawn errors to the farm limits', clipped, errors.size)
    labels = [f'wind@{farm.bus}' for farm in farms]
    try:
        return SampleSet.from_array(errors, labels=labels)
    except AmbiguityError:
        # a single draw is a valid data set here, it just can't size an ambiguity set
        return SampleSet(data=errors, labels=tuple(labels))


def write_samples(samples: SampleSet, path: str, base_mva: float) -> None:
    """Write samples (p.u.) to a CSV file in MW"""

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame = pd.DataFrame(samples.data * base_mva, columns=list(samples.labels))
    frame.to_csv(path, index=False, float_format='%.10g')
    LOGGER.info('Wrote %d samples of %d farms to %s', samples.n_samples, samples.dim, path)


def read_samples(path: str, base_mva: float, farms: Sequence[WindFarm] = None) -> SampleSet:
    """Read a sample CSV in MW and return it in p.u.

    Args:
        path: The CSV file, one column per wind farm.
        base_mva: The case's power base.
        farms: When given, the columns must be headed by these farms' buses.

    Raises:
        ProtocolError: when the file can't be read or doesn't match the farms.
    """

    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError, pd.errors.ParserError) as exc:
        raise ProtocolError(f'cannot read samples {path}: {exc}') from exc
    if farms is not None:
        expected = [f'wind@{farm.bus}' for farm in farms]
        if list(frame.columns) != expected:
            raise ProtocolError(f'sample columns {list(frame.columns)} do not match the wind farms {expected}')
    try:
        values = frame.to_numpy(dtype=float) / base_mva
    except ValueError as exc:
        raise ProtocolError(f'samples in {path} are not all numbers') from exc
    LOGGER.info('Read %d samples of %d farms from %s', values.shape[0], values.shape[1], path)
    return SampleSet.from_array(values, labels=[str(column) for column in frame.columns])
