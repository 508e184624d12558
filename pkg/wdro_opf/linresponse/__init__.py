"""
This package holds the linear power flow model and the constant response
matrices that map a wind forecast error and the AGC participation factors to
the deviations of PQ-bus voltages, generator reactive outputs and line flows.
"""

from wdro_opf import WdroOpfError


class SingularPartitionError(WdroOpfError):
    """The block N of the incremental model is singular for this partition"""


# pylint: disable=wrong-import-position
from wdro_opf.linresponse.partition import Partition
from wdro_opf.linresponse.model import (
    ResponseMatrices, build_response, dump_response, jacobian_model, lpf_model, lpf_solve,
    predict_response,
)

__all__ = [
    'Partition', 'ResponseMatrices', 'SingularPartitionError', 'build_response',
    'dump_response', 'jacobian_model', 'lpf_model', 'lpf_solve', 'predict_response',
]
