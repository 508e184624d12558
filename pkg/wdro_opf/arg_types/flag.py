"""
A Flag is an argument that is either given or not, with no value after it

@wdro_opf.command
def solve(enforce_all: Flag = False) -> TableFormat:
    # enforce_all is True when the user passed --enforce-all
"""

from wdro_opf.arg_types.arg_type import ArgType


class Flag(ArgType):
    """A boolean switch"""

    action = 'store_true'
