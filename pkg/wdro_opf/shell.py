"""
This is the entry point of the wdro-opf program. It configures logging, runs
the one command named on the command line and turns the outcome into an exit
status:

    0  success
    1  unknown command or unexpected error
    2  the problem is infeasible
    3  a solver or power flow failed
    4  the input is invalid
"""

import logging
import os
import sys
import traceback
from typing import List

import wdro_opf
from wdro_opf import commands
from wdro_opf.acgrid import PowerFlowDivergence, SingularJacobianError
from wdro_opf.arg_types import ArgTypeError
from wdro_opf.case_io import CaseParseError, CaseValidationError
from wdro_opf.chance import HypercubeInfeasible
from wdro_opf.commands import CommandError
from wdro_opf.commands import builtin_commands, opf_commands  # pylint: disable=unused-import
from wdro_opf.linresponse import SingularPartitionError
from wdro_opf.opfcore import InfeasibleProblem, SolverFailure
from wdro_opf.rivals import CuttingPlaneLimit
from wdro_opf.simlab import ProtocolError
from wdro_opf.wasserstein import AmbiguityError


LOG_LEVEL_ENV = 'WDRO_OPF_LOG_LEVEL'
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_INPUT = 4

EXIT_CODES = (
    ((InfeasibleProblem, HypercubeInfeasible), EXIT_INFEASIBLE),
    ((SolverFailure, PowerFlowDivergence, SingularJacobianError, SingularPartitionError, CuttingPlaneLimit), EXIT_SOLVER),
    ((CaseParseError, CaseValidationError, AmbiguityError, ProtocolError, CommandError, ArgTypeError), EXIT_INPUT),
)


def configure_logging() -> None:
    """Set up the root logger once, at the level named by the environment"""

    level_name = os.environ.get(LOG_LEVEL_ENV, 'WARNING').upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)


def exit_code(exc: BaseException) -> int:
    """The exit status of a command that raised exc"""

    for error_types, code in EXIT_CODES:
        if isinstance(exc, error_types):
            return code
    return EXIT_ERROR


def run_one_command(command_name: str, cmd_args: List[str]) -> int:
    """Find the command, run it with its arguments and report the outcome"""

    if command_name not in commands.COMMAND_REGISTRY:
        print(f'Unknown command: {command_name}')
        return EXIT_ERROR
    command = commands.COMMAND_REGISTRY[command_name]
    try:
        result = command.run(cmd_args)
        if command.output_formatter:
            command.output_formatter.format_output(result)
        return EXIT_OK
    except wdro_opf.WdroOpfError as exc:
        print(f'{command_name}: {exc}', file=sys.stderr)
        return exit_code(exc)
    except SystemExit as exc:
        # argparse exits 0 after --help and 2 on a usage error
        return EXIT_OK if not exc.code else EXIT_INPUT
    except Exception as exc:  # pylint: disable=broad-except
        print(f'Command execution error: {exc}', file=sys.stderr)
        traceback.print_exc()
        return EXIT_ERROR


def main(argv: List[str] = None) -> int:
    """Run the command named by the first argument.

    Args:
        argv: The arguments after the program name, sys.argv[1:] by default.
    """

    if argv is None:
        argv = sys.argv[1:]
    configure_logging()
    if not argv or argv[0] in ('-h', '--help'):
        return run_one_command('help', [])
    if argv[0] == 'help' and len(argv) == 2 and not argv[1].startswith('-'):
        argv = ['help', '--command-name', argv[1]]
    if argv[0] == '--version':
        print(f'{wdro_opf.PROGRAM_NAME} {wdro_opf.__version__}')
        return EXIT_OK
    return run_one_command(argv[0], argv[1:])
