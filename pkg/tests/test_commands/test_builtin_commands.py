"""
A test module for the wdro_opf.commands.builtin_commands module
"""

import pytest

from wdro_opf.commands import CommandError, builtin_commands
from wdro_opf.commands.cli_command import CLICommand


def _entry(name, group='OPF Commands', is_alias=False, hidden=False):
    return {'name': name, 'group': group, 'is_alias': is_alias, 'hidden': hidden}


@pytest.mark.parametrize("commands, expected_commands, expected_groups", [
    ([_entry('solve')], ['solve'], ['OPF Commands']),
    ([_entry('selfcheck', group='Diagnostics', hidden=True)], [], []),
    ([_entry('solve'), _entry('optimize', is_alias=True)], ['solve'], ['OPF Commands']),
    (
        [
            _entry('solve'),
            _entry('sweep', group='Studies'),
            _entry('optimize', is_alias=True),
            _entry('profile', group='Diagnostics', hidden=True),
        ],
        ['solve', 'sweep'],
        ['OPF Commands', 'Studies'],
    ),
    (
        [
            _entry('help', group=builtin_commands._GROUPNAME),  # pylint: disable=protected-access
            _entry('evaluate'),
            _entry('replay', hidden=True),
        ],
        ['help', 'evaluate'],
        [builtin_commands._GROUPNAME, 'OPF Commands'],  # pylint: disable=protected-access
    ),
])
def test_help_command(commands, expected_commands, expected_groups, clean_registry, capsys):
    """Verify that the help command prints out all of the available commands and
    none of their aliases or hidden commands.
    """

    for command in commands:
        clean_registry[command["name"]] = CLICommand(lambda: None, **command)

    builtin_commands.command_help()
    captured = capsys.readouterr()
    for command in expected_commands:
        assert command in captured.out
    for group in expected_groups:
        assert group in captured.out

    for command in commands:
        if command["name"] not in expected_commands:
            assert command["name"] not in captured.out
        if command["group"] not in expected_groups:
            assert command["group"] not in captured.out


def test_help_lists_builtins_last(clean_registry, capsys):
    """Verify the built-in group comes after the others"""

    clean_registry['help'] = CLICommand(builtin_commands.command_help, group=builtin_commands._GROUPNAME)  # pylint: disable=protected-access
    clean_registry['zzz'] = CLICommand(lambda: None, name='zzz', group='Analysis')
    builtin_commands.command_help()
    out = capsys.readouterr().out
    assert out.index('Analysis') < out.index('Built-in Commands')


def test_help_for_one_command(clean_registry, capsys):
    """Verify help on a single command shows its usage and arguments"""

    def ut_command(case: str, beta: float = 0.9):  # pylint: disable=unused-argument
        """Run the unit test

        Args:
            case: The case file.
            beta: The confidence.
        """

    clean_registry['ut'] = CLICommand(ut_command, name='ut')
    builtin_commands.command_help('ut')
    out = capsys.readouterr().out
    assert out.startswith('usage: wdro-opf ut --case <case>')
    assert '  --beta <float> The confidence.\n    Default: 0.9' in out

    with pytest.raises(CommandError, match='unknown command "nope"'):
        builtin_commands.command_help('nope')
