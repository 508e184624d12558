"""
A Choices type restricts an argument to a static list of values

@wdro_opf.command
def solve(method: Choices.define(['wdro', 'ro']) = 'wdro') -> TableFormat:
    # method is one of the choices in the body of the function
"""

from typing import Sequence

from wdro_opf.arg_types.arg_type import ArgType
from wdro_opf.arg_types.arg_type_error import ArgTypeError


class Choices(ArgType):
    """An argument that must be one of a list of values"""

    @staticmethod
    def define(available_choices: Sequence, data_type=str) -> 'Choices':
        """Build a Choices type for one list of values.

        Args:
            available_choices: The allowed values.
            data_type: The type the value is converted to after the check.
        """

        current_choices = [str(choice) for choice in available_choices]

        class _Choices(Choices):
            metavar = f"<{'|'.join(current_choices)}>"

            def validate(self, arg):
                if arg not in current_choices:
                    raise ArgTypeError(f'"{arg}" must be one of {", ".join(current_choices)}.')
                try:
                    return data_type(arg)
                except (TypeError, ValueError) as exc:
                    raise ArgTypeError(f'Unable to convert "{arg}" to type {data_type.__name__}') from exc

            def choices(self):
                return current_choices

        return _Choices
