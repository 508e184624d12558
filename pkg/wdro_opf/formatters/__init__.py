"""
This package contains the console output formatters. A command names one as
its return annotation and the shell hands the command's result to it.
"""

from wdro_opf.formatters.output_formatter import OutputFormatter
from wdro_opf.formatters.table_formatter import TableFormat

__all__ = ['OutputFormatter', 'TableFormat']
