"""
This package builds the data-driven Wasserstein ambiguity sets: the empirical
sample set and its standardization, the box support, the constant C and the
radius ε(N) of the ball around the empirical distribution.
"""

from wdro_opf import WdroOpfError


class AmbiguityError(WdroOpfError):
    """The inputs can't define an ambiguity set (too few samples, β outside (0, 1))"""


# pylint: disable=wrong-import-position
from wdro_opf.wasserstein.sample_set import SampleSet, SupportBox, estimate_support, l1_diameter
from wdro_opf.wasserstein.ambiguity import AmbiguitySpec, build_ambiguity, estimate_C, radius

__all__ = [
    'AmbiguityError', 'AmbiguitySpec', 'SampleSet', 'SupportBox', 'build_ambiguity',
    'estimate_C', 'estimate_support', 'l1_diameter', 'radius',
]
