"""
This module holds the empirical sample set of forecast errors and everything
derived from it: the sample mean and covariance, the principal square root of
the covariance, the standardized samples and the box support estimated from
them.

The full sample set has one column per wind farm. The chance constraints only
ever look at 1-D or 2-D projections of it (the total error, and the total error
paired with the direct response of one monitored quantity), so `project` builds
those lower dimensional sets on demand.
"""

from dataclasses import dataclass
from functools import cached_property
import hashlib
import itertools
import logging
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

from wdro_opf.wasserstein import AmbiguityError


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

SIGMA_MAX = 10.0
REGULARIZATION = 1e-8
REGULARIZATION_FLOOR = 1e-14
SIGN_VECTOR_DIM_LIMIT = 12


def hypercube_vertices(sigma: float, mean: np.ndarray, sqrt_cov: np.ndarray) -> np.ndarray:
    """The 2^m corners of the standardized box [-sigma, sigma]^m mapped back to
    original coordinates, one corner per row.

    Args:
        sigma: Half side of the box in standardized coordinates.
        mean: Center of the box.
        sqrt_cov: The matrix square root used to standardize.
    """

    dim = len(mean)
    corners = np.array(list(itertools.product((-1.0, 1.0), repeat=dim))) * sigma
    return corners @ sqrt_cov.T + mean


@dataclass(frozen=True, eq=False)
class SampleSet:
    """N historical samples of an m-dimensional random vector, one per row.

    Attributes:
        data: The N x m sample matrix.
        labels: A name for every column.
    """

    data: np.ndarray
    labels: Sequence[str] = ()

    @classmethod
    def from_array(cls, data, labels: Sequence[str] = None) -> 'SampleSet':
        """Build a sample set from anything numpy can turn into an N x m matrix.
        A 1-D input is taken as N samples of a scalar.
        """

        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise AmbiguityError(f'samples must form a matrix, got shape {data.shape}')
        if data.shape[0] < 2:
            raise AmbiguityError(f'at least 2 samples are needed, got {data.shape[0]}')
        if not np.all(np.isfinite(data)):
            raise AmbiguityError('samples contain NaN or infinite values')
        if labels is None:
            labels = [f'x{col}' for col in range(data.shape[1])]
        if len(labels) != data.shape[1]:
            raise AmbiguityError(f'{len(labels)} labels given for {data.shape[1]} columns')
        return cls(data=np.ascontiguousarray(data), labels=tuple(labels))

    @property
    def n_samples(self) -> int:
        """N"""

        return self.data.shape[0]

    @property
    def dim(self) -> int:
        """m"""

        return self.data.shape[1]

    @cached_property
    def mean(self) -> np.ndarray:
        """The sample mean μ̂"""

        return self.data.mean(axis=0)

    @cached_property
    def cov(self) -> np.ndarray:
        """The sample covariance Σ̂ with δI added so it is positive definite"""

        raw = np.atleast_2d(np.cov(self.data, rowvar=False, ddof=1))
        delta = max(REGULARIZATION * np.trace(raw) / self.dim, REGULARIZATION_FLOOR)
        if np.linalg.eigvalsh(raw)[0] < delta:
            LOGGER.warning('Sample covariance of %s is nearly singular, regularized by %.3e', self.labels, delta)
        return raw + delta * np.eye(self.dim)

    @cached_property
    def _eigen(self):
        eigval, eigvec = np.linalg.eigh(self.cov)
        return np.maximum(eigval, REGULARIZATION_FLOOR), eigvec

    @cached_property
    def sqrt_cov(self) -> np.ndarray:
        """The principal square root Σ̂^{1/2}"""

        eigval, eigvec = self._eigen
        return (eigvec * np.sqrt(eigval)) @ eigvec.T

    @cached_property
    def inv_sqrt_cov(self) -> np.ndarray:
        """Σ̂^{-1/2}"""

        eigval, eigvec = self._eigen
        return (eigvec / np.sqrt(eigval)) @ eigvec.T

    @cached_property
    def standardized(self) -> np.ndarray:
        """ϑ̂^(k) = Σ̂^{-1/2}(ξ̂^(k) − μ̂), one per row"""

        return (self.data - self.mean) @ self.inv_sqrt_cov.T

    @cached_property
    def d(self) -> np.ndarray:
        """The ℓ∞ norm of every standardized sample"""

        return np.max(np.abs(self.standardized), axis=1)

    def standardize(self, points: np.ndarray) -> np.ndarray:
        """Standardize arbitrary points (one per row) with this set's μ̂ and Σ̂"""

        return (np.atleast_2d(points) - self.mean) @ self.inv_sqrt_cov.T

    def project(self, weights: np.ndarray, labels: Sequence[str] = None) -> 'SampleSet':
        """The sample set of weights @ ξ.

        Args:
            weights: A k x m matrix (or a length-m vector for a scalar projection).
            labels: Names of the k projected coordinates.
        """

        weights = np.atleast_2d(np.asarray(weights, dtype=float))
        return SampleSet.from_array(self.data @ weights.T, labels=labels)

    def digest(self) -> str:
        """A sha256 of the shape and contents, used to key caches"""

        sha = hashlib.sha256()
        sha.update(repr(self.data.shape).encode())
        sha.update(np.ascontiguousarray(self.data, dtype='<f8').tobytes())
        return sha.hexdigest()


@dataclass(frozen=True, eq=False)
class SupportBox:
    """The box Ξ = {ξ : ‖Σ̂^{-1/2}(ξ − μ̂)‖∞ ≤ σ_max} estimated from a sample set"""

    sigma_max: float
    mean: np.ndarray
    sqrt_cov: np.ndarray
    inv_sqrt_cov: np.ndarray

    @cached_property
    def vertices(self) -> np.ndarray:
        """Corners of the box in original coordinates, one per row"""

        return hypercube_vertices(self.sigma_max, self.mean, self.sqrt_cov)

    @property
    def lower(self) -> np.ndarray:
        """Smallest value of every coordinate inside the box"""

        return self.vertices.min(axis=0)

    @property
    def upper(self) -> np.ndarray:
        """Largest value of every coordinate inside the box"""

        return self.vertices.max(axis=0)

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Which of the points (one per row) lie inside the box"""

        scaled = (np.atleast_2d(points) - self.mean) @ self.inv_sqrt_cov.T
        return np.max(np.abs(scaled), axis=1) <= self.sigma_max + tol


def estimate_support(samples: SampleSet, sigma_max: float = SIGMA_MAX) -> SupportBox:
    """Estimate the support of the distribution as a box of half side sigma_max in
    standardized coordinates.

    Args:
        samples: The empirical sample set.
        sigma_max: Half side of the standardized box. 0 collapses the box onto μ̂.
    """

    if sigma_max < 0:
        raise AmbiguityError(f'sigma_max must be non-negative, got {sigma_max}')
    return SupportBox(
        sigma_max=float(sigma_max),
        mean=samples.mean,
        sqrt_cov=samples.sqrt_cov,
        inv_sqrt_cov=samples.inv_sqrt_cov,
    )


def l1_diameter(data: np.ndarray) -> float:
    """The largest ℓ1 distance between two rows of data.

    For a handful of columns this is the largest spread of s·x over the sign
    vectors s, which is exact and linear in N. Wider data falls back to the
    pairwise distances.
    """

    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] < 2:
        return 0.0
    dim = data.shape[1]
    if dim > SIGN_VECTOR_DIM_LIMIT:
        return float(pdist(data, metric='cityblock').max())
    # s and -s give the same spread
    signs = np.array([(1.0,) + rest for rest in itertools.product((-1.0, 1.0), repeat=dim - 1)])
    projected = data @ signs.T
    return float(np.max(projected.max(axis=0) - projected.min(axis=0)))
