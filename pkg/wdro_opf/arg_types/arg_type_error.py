"""
This module contains the error raised when user input doesn't fit an
argument's type.
"""

import inspect

from wdro_opf import WdroOpfError
from wdro_opf.arg_types.arg_type import ArgType


class ArgTypeError(WdroOpfError):
    """Input that doesn't fit its argument. When raised from inside an ArgType's
    method, the argument's name is put in front of the message.
    """

    def __init__(self, message: str):
        try:
            type_instance = inspect.currentframe().f_back.f_locals.get('self')
        except Exception:  # pylint: disable=broad-except
            type_instance = None
        if isinstance(type_instance, ArgType) and type_instance.arg_name is not None:
            message = f'{type_instance.arg_name}: {message}'
        super().__init__(message)
