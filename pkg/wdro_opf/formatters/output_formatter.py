"""
This module contains the abstract class every output formatter inherits from
"""

from abc import ABC, abstractmethod


class OutputFormatter(ABC):  # pylint: disable=too-few-public-methods
    """All output formatters inherit from this class"""

    @abstractmethod
    def format_output(self, results):
        """Present the result of a command to the user"""
