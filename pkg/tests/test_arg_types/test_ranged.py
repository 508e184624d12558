"""
A test module for the wdro_opf.arg_types.ranged module
"""

from contextlib import ExitStack as does_not_raise

import pytest

from wdro_opf.arg_types import ArgTypeError, RangedFloat, RangedInt


@pytest.mark.parametrize("min_val, max_val, user_input, expectation", [
    (2, 10, "5", does_not_raise()), (0, None, "100", does_not_raise()),
    (None, 100, "-50", does_not_raise()), (None, None, "100", does_not_raise()),
    (2, 10, "10", does_not_raise()),
    (2, 10, "1", pytest.raises(ArgTypeError)), (0, None, "-1", pytest.raises(ArgTypeError)),
    (None, 100, "105", pytest.raises(ArgTypeError)),
    (2, 10, "foo", pytest.raises(ArgTypeError, match=r'\[2, 10\]')),
])
def test_ranged_int(min_val, max_val, user_input, expectation):
    """Verify the RangedInt type will assert the user provided something in the
    specified range"""

    ranged_int = RangedInt.define(min=min_val, max=max_val)()
    with expectation:
        assert ranged_int.validate(user_input) == int(user_input)


@pytest.mark.parametrize("min_val, max_val, inclusive, user_input, expectation", [
    (0, 1, False, "0.9", does_not_raise()),
    (0, 1, True, "1", does_not_raise()),
    (0, None, True, "1e3", does_not_raise()),
    (0, 1, False, "1", pytest.raises(ArgTypeError, match=r'\(0, 1\)')),
    (0, 1, False, "0", pytest.raises(ArgTypeError)),
    (None, None, True, "nan", pytest.raises(ArgTypeError)),
    (None, None, True, "inf", pytest.raises(ArgTypeError)),
    (0, 1, True, "half", pytest.raises(ArgTypeError, match='not a number')),
])
def test_ranged_float(min_val, max_val, inclusive, user_input, expectation):
    """Verify the RangedFloat type checks finiteness and both ends of the range"""

    ranged_float = RangedFloat.define(min=min_val, max=max_val, inclusive=inclusive)()
    with expectation:
        assert ranged_float.validate(user_input) == float(user_input)


def test_metavar():
    """Verify the range shows in the help text placeholder"""

    assert RangedFloat.define(min=0, max=1, inclusive=False).metavar == '<float(0, 1)>'
    assert RangedInt.define(min=1).metavar == '<int[1, inf]>'
