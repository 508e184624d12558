"""
This package generates forecast error data from a sampling protocol and judges
strategies out of sample: Monte Carlo trials of the system response under the
exact AC model or one of its approximations, and the model accuracy tables
that compare those models at fixed error levels.
"""

from wdro_opf import WdroOpfError


class ProtocolError(WdroOpfError):
    """A sampling protocol or a sample file can't be used"""


# pylint: disable=wrong-import-position
from wdro_opf.simlab.protocol import (
    DISTRIBUTIONS, RngProtocol, generate_samples, load_protocol, read_samples, write_samples,
)
from wdro_opf.simlab.evaluation import MODELS, EvaluationReport, ModelEvaluator, evaluate_strategy
from wdro_opf.simlab.accuracy import error_profile, model_accuracy_report

__all__ = [
    'DISTRIBUTIONS', 'EvaluationReport', 'MODELS', 'ModelEvaluator', 'ProtocolError', 'RngProtocol',
    'error_profile', 'evaluate_strategy', 'generate_samples', 'load_protocol', 'model_accuracy_report',
    'read_samples', 'write_samples',
]
