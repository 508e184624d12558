"""
A test module for the wdro_opf.commands.cli_command module
"""

from typing import List

import pytest

import wdro_opf
from wdro_opf.arg_types import Choices, Flag, RangedFloat
from wdro_opf.commands.cli_command import CLICommand, option_name
from wdro_opf.formatters.table_formatter import TableFormat


# pylint: disable=unused-argument
def unit_test_command(
    types: Choices.define(["type1", "type2", "type3"]),
    names: List[str],
    optional: str = "foo",
    optional2: bool = False,
    optional3: Flag = False,
    rho: List[RangedFloat.define(min=0, max=1, inclusive=False)] = (0.05,),
) -> TableFormat:
    """This is a test command short description

    This is a test command long description

    Args:
        types: This is the types parameter
        names: This is the names parameter
        optional: This is the optional parameter
        optional2: This is the optional2 parameter
        optional3: This is the optional3 parameter
        rho: This is the rho parameter
    """

    return [{'types': types, 'names': names, 'optional': optional, 'optional2': optional2,
             'optional3': optional3, 'rho': rho}]


def test_command_init():
    """Verify that given a function, the CLICommand parses it correctly and contains
    a list of parameters and docstrings for those parameters.
    """

    command = CLICommand(unit_test_command)
    assert command.name == "unit_test_command"
    assert len(command.required_args) == 2
    assert len(command.optional_args) == 4
    assert isinstance(command.output_formatter, TableFormat)
    assert not command.hidden
    assert not command.is_alias


def test_option_name():
    """Verify parameters are spelled in kebab case on the command line"""

    assert option_name('sigma_max') == '--sigma-max'
    assert option_name('case') == '--case'


@pytest.mark.parametrize("arg_name, expected", [
    ("types", "  --types <type1|type2|type3> This is the types parameter"),
    ("names", "  --names <names> [...] This is the names parameter"),
    ("optional", "  --optional <optional> This is the optional parameter\n    Default: foo"),
    ("optional2", "  --optional2 <true|false> This is the optional2 parameter\n    Default: false"),
    ("optional3", "  --optional3 This is the optional3 parameter"),
    ("rho", "  --rho <float(0, 1)> [...] This is the rho parameter\n    Default: 0.05"),
])
def test_get_arg_help(arg_name, expected):
    """Verify we can generate help text for a given arg"""

    command = CLICommand(unit_test_command)
    args = {arg.name: arg for arg in command.required_args + command.optional_args}
    assert command.get_arg_help(args[arg_name]) == expected


def test_get_command_help():
    """Verify we can generate help text for the whole command"""

    command = CLICommand(unit_test_command)
    help_text = command.get_command_help()
    assert command.docstring.short_description in help_text
    assert command.docstring.long_description not in help_text
    assert 'Required arguments:' in help_text
    assert 'Optional arguments:' in help_text
    for arg in command.required_args + command.optional_args:
        assert command.get_arg_help(arg) in help_text


@pytest.mark.parametrize("cmd_args, expected", [
    (
        ['--types', 'type1', '--names', 'a', 'b'],
        {'types': 'type1', 'names': ['a', 'b'], 'optional': 'foo', 'optional2': False,
         'optional3': False, 'rho': (0.05,)},
    ),
    (
        ['--types', 'type1', '--names', 'a', '--rho'],
        {'types': 'type1', 'names': ['a'], 'optional': 'foo', 'optional2': False,
         'optional3': False, 'rho': []},
    ),
    (
        ['--types', 'type2', '--names', 'a', '--optional2', 'true', '--optional3', '--rho', '0.1', '0.2'],
        {'types': 'type2', 'names': ['a'], 'optional': 'foo', 'optional2': True,
         'optional3': True, 'rho': [0.1, 0.2]},
    ),
])
def test_run(cmd_args, expected):
    """Verify the arguments reach the function converted"""

    assert CLICommand(unit_test_command).run(cmd_args) == [expected]


@pytest.mark.parametrize("cmd_args", [
    ['--names', 'a'],
    ['--types', 'type4', '--names', 'a'],
    ['--types', 'type1', '--types', 'type2', '--names', 'a'],
    ['--types', 'type1', '--names'],
])
def test_run_refuses(cmd_args):
    """Verify missing, invalid and repeated arguments stop the command"""

    with pytest.raises((SystemExit, wdro_opf.arg_types.ArgTypeError)):
        CLICommand(unit_test_command).run(cmd_args)


def test_register(clean_registry):
    """Verify the decorator registers a command under its name and aliases"""

    @wdro_opf.command(name='solve-it', aliases=['si'], group='UT')
    def solve_it():  # pylint: disable=unused-variable
        """Solve something"""

    assert set(clean_registry) == {'solve-it', 'si'}
    assert not clean_registry['solve-it'].is_alias
    assert clean_registry['si'].is_alias
    assert clean_registry['si'].group == 'UT'
