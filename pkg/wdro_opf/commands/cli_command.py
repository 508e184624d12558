"""
This module contains the definition of a CLICommand object. A CLICommand wraps
a function and builds an argparse parser from its signature and its docstring,
so the function can be called from the command line with validated arguments
and asked for its help text.

Parameters become --kebab-case options: a parameter without a default is a
required option, one with a default is optional.
"""

import argparse
from functools import partial, wraps
import inspect
import io
import logging
from typing import List

import docstring_parser

from wdro_opf import commands
from wdro_opf.arg_types.arg_type import ArgType, UniqueParam
from wdro_opf.arg_types.flag import Flag
from wdro_opf.formatters.output_formatter import OutputFormatter


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


def option_name(name: str) -> str:
    """The command line spelling of a parameter name"""

    return '--' + name.replace('_', '-')


class CLICommand:
    """The implementation of a @wdro_opf.command. It sets up the parameter
    validation, the help text and the output formatting of a command.
    """

    def __init__(self, func, name: str = None, group: str = None, is_alias: bool = False, hidden: bool = False):
        self.func = func
        self.name = name if name else func.__name__
        self.is_alias = is_alias
        self.group = group
        self.hidden = hidden

        signature = inspect.signature(func)
        parameters = signature.parameters
        self.required_args = [p for p in parameters.values() if p.default == inspect.Parameter.empty]
        self.optional_args = [p for p in parameters.values() if p.default != inspect.Parameter.empty]
        self.docstring = docstring_parser.parse(self.func.__doc__ or '')

        return_type = signature.return_annotation
        if inspect.isclass(return_type) and issubclass(return_type, OutputFormatter):
            self.output_formatter = return_type()
        else:
            self.output_formatter = None
        self.parser = self._create_parser()

    def __str__(self):
        return '%s(%s, *, %s)' % (
            self.name, ', '.join([p.name for p in self.required_args]),
            ', '.join(['%s=%s' % (p.name, p.default) for p in self.optional_args]),
        )

    def _create_parser(self):
        description = '\n\n'.join(
            text for text in (self.docstring.short_description, self.docstring.long_description) if text
        )
        parser = argparse.ArgumentParser(prog=self.name, add_help=False, description=description)
        parser.add_argument('--help', '-h', help=argparse.SUPPRESS, action=self.print_help())
        specs = [self._get_arg_spec(arg, True) for arg in self.required_args]
        specs += [self._get_arg_spec(arg, False) for arg in self.optional_args]
        for spec_args, spec_kwargs in specs:
            parser.add_argument(*spec_args, **spec_kwargs)
        return parser

    def _get_arg_spec(self, arg, required):
        spec_args = [option_name(arg.name)]
        spec_kwargs = {
            'dest': arg.name,
            'action': self.get_arg_action(arg),
            'help': self.get_arg_description(arg),
            'metavar': self.get_arg_metavar(arg),
            'required': required,
        }
        if arg.default != inspect.Parameter.empty:
            spec_kwargs['default'] = arg.default

        def _arg_type_handler(arg_annotation, nargs=None):
            type_instance = arg_annotation()
            type_instance.arg_name = arg.name
            if isinstance(type_instance, Flag):
                for key in ('metavar', 'required'):
                    spec_kwargs.pop(key, None)
                return
            spec_kwargs['type'] = type_instance.validate
            choices = type_instance.choices()
            if choices is not None:
                spec_kwargs['choices'] = [type_instance.validate(choice) for choice in choices]
            spec_kwargs['nargs'] = nargs or type_instance.nargs()

        annotation_type = get_annotation_type(arg)
        if annotation_type is list or annotation_type is List:
            # an optional list may be given empty
            list_nargs = '+' if required else '*'
            item_type = arg.annotation.__args__[0]
            if inspect.isclass(item_type) and issubclass(item_type, ArgType):
                _arg_type_handler(item_type, list_nargs)
            else:
                spec_kwargs['nargs'] = list_nargs
                spec_kwargs['type'] = item_type
        elif inspect.isclass(annotation_type):
            if issubclass(annotation_type, ArgType):
                _arg_type_handler(annotation_type)
            elif issubclass(annotation_type, bool):
                spec_kwargs['choices'] = [True, False]
                spec_kwargs['type'] = lambda val: val.lower() == 'true'
            elif issubclass(annotation_type, (int, float)):
                spec_kwargs['type'] = annotation_type

        return spec_args, spec_kwargs

    def get_arg_action(self, arg):  # pylint: disable=no-self-use
        """Arguments are checked to be unique unless their type has its own action"""

        annotation_type = get_annotation_type(arg)
        if inspect.isclass(annotation_type) and issubclass(annotation_type, ArgType):
            return annotation_type.action
        return UniqueParam

    def get_arg_metavar(self, arg):  # pylint: disable=no-self-use
        """The placeholder of an argument's value in the help text"""

        annotation_type = get_annotation_type(arg)
        if annotation_type is list or annotation_type is List:
            item_type = arg.annotation.__args__[0]
            item = item_type.metavar if inspect.isclass(item_type) and issubclass(item_type, ArgType) \
                else f'<{arg.name}>'
            return f'{item} [...]'
        if inspect.isclass(annotation_type):
            if issubclass(annotation_type, ArgType):
                return annotation_type.metavar
            if issubclass(annotation_type, bool):
                return '<true|false>'
            if issubclass(annotation_type, int):
                return '<int>'
            if issubclass(annotation_type, float):
                return '<float>'
        return f'<{arg.name}>'

    def get_arg_description(self, arg, indent=None):
        """The description of the arg from the docstring, blank when it has none"""

        for doc_param in self.docstring.params:
            if doc_param.arg_name == arg.name:
                if indent is None:
                    return doc_param.description.replace('\n', ' ')
                return doc_param.description.replace('\n', '\n' + ' ' * indent)
        return ''

    def get_arg_help(self, arg):
        """One entry of help text for an argument: name, metavar, description and default"""

        annotation_type = get_annotation_type(arg)
        is_flag = inspect.isclass(annotation_type) and issubclass(annotation_type, Flag)
        name_meta = f'  {option_name(arg.name)} '
        if not is_flag:
            name_meta += f'{self.get_arg_metavar(arg)} '
        arg_help = name_meta + self.get_arg_description(arg, indent=len(name_meta))
        if arg.default != inspect.Parameter.empty and arg.default is not None and not is_flag:
            default_val = arg.default
            if isinstance(default_val, bool):
                default_val = str(default_val).lower()
            elif isinstance(default_val, (list, tuple)):
                default_val = ' '.join(str(value) for value in default_val)
            arg_help += f'\n    Default: {default_val}'
        return arg_help

    def get_command_help(self):
        """The help text of the command: its short description and every argument"""

        help_text = []
        if self.docstring.short_description:
            help_text.append(self.docstring.short_description)
        if self.required_args or self.optional_args:
            help_text.append('')
        if self.required_args:
            help_text.append('Required arguments:')
            help_text.extend(self.get_arg_help(arg) for arg in self.required_args)
            if self.optional_args:
                help_text.append('')
        if self.optional_args:
            help_text.append('Optional arguments:')
            help_text.extend(self.get_arg_help(arg) for arg in self.optional_args)
        return '\n'.join(help_text)

    def get_command_usage(self):
        """The short usage line of the command"""

        str_file = io.StringIO()
        self.parser.print_usage(file=str_file)
        return str_file.getvalue().replace('usage: ', '', 1).strip()

    def print_help(outer_self):  # pylint: disable=no-self-argument
        """An argparse action printing the command's own help text for --help"""

        class HelpAction(argparse.Action):  # pylint: disable=too-few-public-methods
            """Print the help of the command and stop parsing"""

            def __init__(
                    self,
                    option_strings,
                    dest=argparse.SUPPRESS,
                    default=argparse.SUPPRESS,
                    help=None,  # pylint: disable=redefined-builtin
            ):
                super().__init__(option_strings, dest=dest, default=default, nargs=0, help=help)

            def __call__(self, parser, namespace, values, option_string=None):
                print(outer_self.get_command_help())
                parser.exit()

        return HelpAction

    def run(self, cmd_args: List[str]):
        """Parse the arguments and call the function with them"""

        namespace = self.parser.parse_args(args=cmd_args)
        args = [getattr(namespace, arg.name) for arg in self.required_args]
        kwargs = {arg.name: getattr(namespace, arg.name) for arg in self.optional_args}
        return self.func(*args, **kwargs)


def command(func=None, name: str = None, group: str = None, aliases: List[str] = None, hidden: bool = False):
    """Wrapping a function with this registers it as a command of the program.

    The name of the command is the name of the function unless given. Required
    parameters of the function are required options of the command, keyword
    parameters are optional ones.

    Args:
        name: The command name, when it shouldn't be the function name.
        group: Commands sharing a group are listed together by help.
        aliases: Other names mapping to the same function.
        hidden: Hidden commands run but aren't listed by help.
    """

    if func is None:
        return partial(command, name=name, group=group, aliases=aliases, hidden=hidden)

    @wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    _register(wrapper, name, group, aliases, hidden)
    return wrapper


def _register(func, name, group, aliases, hidden):
    command_name = name if name is not None else func.__name__
    names = [command_name] + list(aliases or [])
    for index, alias in enumerate(names):
        is_alias = index > 0
        commands.COMMAND_REGISTRY[alias] = CLICommand(
            func, name=alias, group=group, is_alias=is_alias, hidden=hidden,
        )
        if not is_alias:
            LOGGER.debug('Registered %s', commands.COMMAND_REGISTRY[alias])
        else:
            LOGGER.debug('Aliased %s to %s', alias, command_name)


def get_annotation_type(arg):
    """The class behind an annotation, unwrapping typing generics such as List[X]"""

    return getattr(arg.annotation, '__origin__', arg.annotation)
