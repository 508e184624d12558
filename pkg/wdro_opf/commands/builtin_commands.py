"""
The commands defined here come with the program regardless of the OPF work
"""

from collections import OrderedDict
from operator import attrgetter

import wdro_opf
from wdro_opf import commands
from wdro_opf.commands import CommandError
from wdro_opf.commands.cli_command import command


_GROUPNAME = 'Built-in Commands'


def _print_group(title: str, entries) -> None:
    if title:
        print(f"{title}\n{'-' * len(title)}")
    for entry in sorted(entries, key=attrgetter('name')):
        print(f'{entry.name} - {entry.docstring.short_description}')


@command(group=_GROUPNAME, name='help')
def command_help(command_name: str = None) -> None:
    """Display the available commands, or the arguments of one of them

    Args:
        command_name: The command to describe.
    """

    if command_name:
        entry = commands.COMMAND_REGISTRY.get(command_name)
        if entry is None:
            raise CommandError(f'No help for unknown command "{command_name}"')
        print(f'usage: {wdro_opf.PROGRAM_NAME} {entry.get_command_usage()}')
        print()
        print(entry.get_command_help())
        return

    groups = OrderedDict()
    print(f'usage: {wdro_opf.PROGRAM_NAME} <command> [options]')
    print()
    print('Available Commands:')
    print()
    for entry in commands.COMMAND_REGISTRY.values():
        if entry.is_alias or entry.hidden:
            continue
        groups.setdefault(entry.group or '', []).append(entry)

    # the builtin commands are listed last
    builtins = groups.pop(_GROUPNAME, [])
    for group in sorted(groups.keys()):
        _print_group(group, groups[group])
        print()
    _print_group(_GROUPNAME, builtins)
