"""
This module contains the base class of every typed command argument
"""

from abc import ABC
import argparse
from typing import Any, List, Optional, Union


class UniqueParam(argparse.Action):  # pylint: disable=too-few-public-methods
    """An argparse action that refuses a parameter given more than once"""

    def __call__(self, parser, namespace, values, option_string=None):
        current_value = getattr(namespace, self.dest)
        if current_value != self.default and current_value is not None:
            parser.error(f'Duplicate parameter "{option_string}"')
        setattr(namespace, self.dest, values)


class ArgType(ABC):
    """The base class of the typed arguments. The argparse settings of an
    argument (metavar, action, nargs, choices) come from its type.
    """

    metavar = '<value>'
    action = UniqueParam

    def __init__(self):
        self.arg_name = None

    def choices(self) -> Optional[List[Any]]:  # pylint: disable=no-self-use
        """The fixed list of values the argument accepts, if there is one"""

        return None

    def nargs(self) -> Optional[Union[int, str]]:  # pylint: disable=no-self-use
        """How many values the argument takes, in argparse's terms"""

        return None

    def validate(self, arg: str) -> Any:  # pylint: disable=no-self-use
        """Check the user's input and convert it to the value the command gets.
        Raise an ArgTypeError with a message for the user when it doesn't fit.
        """

        return arg
