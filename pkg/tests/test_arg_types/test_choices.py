"""
A test module for the wdro_opf.arg_types.choices module
"""

from contextlib import ExitStack as does_not_raise

import pytest

from wdro_opf.arg_types import ArgTypeError, Choices


@pytest.mark.parametrize("valid_choices, user_choice, expectation", [
    (["wdro", "ro"], "wdro", does_not_raise()),
    (["wdro", "ro"], "saa", pytest.raises(ArgTypeError, match='must be one of wdro, ro')),
    ([], "anything", pytest.raises(ArgTypeError)),
])
def test_choices(valid_choices, user_choice, expectation):
    """Verify the Choices type will be picky about which values are allowed"""

    choices = Choices.define(valid_choices)()
    assert choices.choices() == valid_choices
    with expectation:
        assert choices.validate(user_choice) == user_choice


def test_choices_convert():
    """Verify a chosen value is converted to the data type of the choices"""

    choices = Choices.define([50, 100, 150], data_type=int)()
    assert choices.metavar == '<50|100|150>'
    assert choices.validate('100') == 100


def test_error_names_the_argument():
    """Verify the error message starts with the argument it is about"""

    choices = Choices.define(['approx', 'full-ac'])()
    choices.arg_name = 'model'
    with pytest.raises(ArgTypeError, match='^model: "dc" must be one of'):
        choices.validate('dc')
