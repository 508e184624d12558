"""
This package contains the typed arguments of the command line. A command that
takes input with restrictions annotates the parameter with one of these types
and the value is checked (and converted) before the command body runs:

from wdro_opf.arg_types import RangedFloat

@wdro_opf.command
def solve(beta: RangedFloat.define(min=0, max=1, inclusive=False) = 0.9) -> TableFormat:
    # beta already lies strictly between 0 and 1 here
"""

from wdro_opf.arg_types.arg_type import ArgType, UniqueParam
from wdro_opf.arg_types.arg_type_error import ArgTypeError
from wdro_opf.arg_types.choices import Choices
from wdro_opf.arg_types.flag import Flag
from wdro_opf.arg_types.ranged import RangedFloat, RangedInt

__all__ = ['ArgType', 'ArgTypeError', 'Choices', 'Flag', 'RangedFloat', 'RangedInt', 'UniqueParam']
