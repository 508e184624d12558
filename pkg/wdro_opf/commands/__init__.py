"""
This package contains the command decorator, the registry it fills and the
commands of the wdro-opf program.
"""

from wdro_opf import WdroOpfError

COMMAND_REGISTRY = {}


class CommandError(WdroOpfError):
    """A command can't go on with the input it was given. The shell prints the
    message and exits with the input error status.
    """


__all__ = ['COMMAND_REGISTRY', 'CommandError']
