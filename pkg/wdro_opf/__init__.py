"""
wdro_opf solves the distributionally robust chance-constrained approximate AC
optimal power flow. A network case and a set of historical wind forecast errors
go in; a dispatch strategy (setpoints, AGC participation factors and reserves)
comes out, along with benchmark formulations and a Monte Carlo harness to
check the strategy against the exact AC response.
"""

PROGRAM_NAME = 'wdro-opf'
__version__ = '2026.10.0'


class WdroOpfError(Exception):
    """The root of every error raised on purpose by this package. The shell turns
    subclasses of it into a message and an exit code instead of a traceback.
    """


from wdro_opf.commands.cli_command import command  # pylint: disable=wrong-import-position
from wdro_opf.shell import main  # pylint: disable=wrong-import-position

__all__ = ['PROGRAM_NAME', 'WdroOpfError', 'command', 'main']
