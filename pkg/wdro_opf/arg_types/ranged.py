"""
Ranged types accept a number within bounds. A value outside of the range fails
validation and the user gets an error instead of the command running.

@wdro_opf.command
def sweep(n_mc: RangedInt.define(min=1) = 100000) -> TableFormat:
    # n_mc is a positive integer here
"""

import math

from wdro_opf.arg_types.arg_type import ArgType
from wdro_opf.arg_types.arg_type_error import ArgTypeError


def _range_text(min_val, max_val, inclusive: bool) -> str:
    low = '-inf' if min_val is None else min_val
    high = 'inf' if max_val is None else max_val
    return f'[{low}, {high}]' if inclusive else f'({low}, {high})'


def _in_range(value, min_val, max_val, inclusive: bool) -> bool:
    if min_val is not None and (value < min_val if inclusive else value <= min_val):
        return False
    if max_val is not None and (value > max_val if inclusive else value >= max_val):
        return False
    return True


class RangedInt(ArgType):
    """An integer within an inclusive range"""

    @staticmethod
    def define(
        min: int = None,  # pylint: disable=redefined-builtin
        max: int = None,  # pylint: disable=redefined-builtin
    ) -> 'RangedInt':
        """Build an integer type with an optional minimum and maximum.

        Args:
            min: The smallest accepted value.
            max: The largest accepted value.
        """

        min_val, max_val = min, max
        range_str = _range_text(min_val, max_val, True)

        class _RangedInt(RangedInt):
            metavar = f'<int{range_str}>'

            def validate(self, arg):
                try:
                    value = int(arg)
                except ValueError as exc:
                    raise ArgTypeError(f'"{arg}" is not an integer in the range {range_str}.') from exc
                if not _in_range(value, min_val, max_val, True):
                    raise ArgTypeError(f'"{arg}" is not an integer in the range {range_str}.')
                return value

        return _RangedInt


class RangedFloat(ArgType):
    """A finite real number within a range"""

    @staticmethod
    def define(
        min: float = None,  # pylint: disable=redefined-builtin
        max: float = None,  # pylint: disable=redefined-builtin
        inclusive: bool = True,
    ) -> 'RangedFloat':
        """Build a float type with an optional minimum and maximum.

        Args:
            min: The lower end of the range.
            max: The upper end of the range.
            inclusive: Whether the ends themselves are accepted.
        """

        min_val, max_val = min, max
        range_str = _range_text(min_val, max_val, inclusive)

        class _RangedFloat(RangedFloat):
            metavar = f'<float{range_str}>'

            def validate(self, arg):
                try:
                    value = float(arg)
                except ValueError as exc:
                    raise ArgTypeError(f'"{arg}" is not a number in the range {range_str}.') from exc
                if not math.isfinite(value) or not _in_range(value, min_val, max_val, inclusive):
                    raise ArgTypeError(f'"{arg}" is not a number in the range {range_str}.')
                return value

        return _RangedFloat
