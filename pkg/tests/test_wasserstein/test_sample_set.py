"""
A test module for the wdro_opf.wasserstein.sample_set module
"""

from contextlib import ExitStack as does_not_raise

import numpy as np
from numpy.testing import assert_allclose
import pytest
from scipy.spatial.distance import pdist

from wdro_opf.wasserstein import AmbiguityError, SampleSet, estimate_support, l1_diameter


@pytest.mark.parametrize("data, labels, expectation", [
    (np.ones((5, 2)), ['a', 'b'], does_not_raise()),
    (np.arange(4.0), None, does_not_raise()),
    (np.ones((1, 2)), None, pytest.raises(AmbiguityError)),
    (np.array([[1.0, np.nan], [2.0, 3.0]]), None, pytest.raises(AmbiguityError)),
    (np.ones((5, 2)), ['a'], pytest.raises(AmbiguityError)),
    (np.ones((2, 2, 2)), None, pytest.raises(AmbiguityError)),
])
def test_from_array(data, labels, expectation):
    """Verify only finite matrices with two or more rows become sample sets"""

    with expectation:
        samples = SampleSet.from_array(data, labels)
        assert samples.data.ndim == 2


def test_standardized_samples():
    """Verify standardized samples have zero mean and unit covariance"""

    rng = np.random.default_rng(11)
    mixing = np.array([[2.0, 0.0, 0.0], [1.0, 0.5, 0.0], [0.3, -0.2, 1.5]])
    samples = SampleSet.from_array(rng.standard_normal((500, 3)) @ mixing.T)
    standardized = samples.standardized
    assert_allclose(standardized.mean(axis=0), 0.0, atol=1e-10)
    assert_allclose(np.cov(standardized, rowvar=False), np.eye(3), atol=1e-6)
    assert_allclose(samples.sqrt_cov @ samples.sqrt_cov, samples.cov, atol=1e-10)
    assert_allclose(samples.d, np.abs(standardized).max(axis=1))


def test_project():
    """Verify projections keep one column per weight row"""

    samples = SampleSet.from_array(np.arange(12.0).reshape(4, 3))
    total = samples.project(np.ones(3), labels=['total'])
    assert total.dim == 1
    assert_allclose(total.data[:, 0], [3.0, 12.0, 21.0, 30.0])
    assert total.labels == ('total',)
    assert samples.project(np.eye(3)[:2]).dim == 2


def test_digest_tracks_contents():
    """Verify the digest changes with the data and not with the labels"""

    data = np.arange(6.0).reshape(3, 2)
    first = SampleSet.from_array(data, ['a', 'b'])
    assert first.digest() == SampleSet.from_array(data.copy(), ['c', 'd']).digest()
    assert first.digest() != SampleSet.from_array(data + 1e-9).digest()


def test_support_box():
    """Verify the box holds its samples, center and corners"""

    rng = np.random.default_rng(5)
    samples = SampleSet.from_array(rng.laplace(size=(300, 2)))
    box = estimate_support(samples, sigma_max=10.0)
    assert box.vertices.shape == (4, 2)
    assert box.contains(samples.data).all()
    assert box.contains(box.vertices).all()
    assert box.contains(samples.mean[None, :]).all()
    assert not box.contains(box.upper + 1.0).any()
    assert np.all(box.lower < samples.data.min(axis=0))
    collapsed = estimate_support(samples, sigma_max=0.0)
    assert_allclose(collapsed.lower, samples.mean)
    with pytest.raises(AmbiguityError):
        estimate_support(samples, sigma_max=-1.0)


@pytest.mark.parametrize("dim", [1, 3, 14])
def test_l1_diameter(dim):
    """Verify the ℓ1 diameter agrees with the largest pairwise distance"""

    rng = np.random.default_rng(dim)
    data = rng.standard_normal((40, dim))
    assert l1_diameter(data) == pytest.approx(pdist(data, metric='cityblock').max())
    assert l1_diameter(data[:1]) == 0.0
