"""
This module contains a table formatter for command output. The formatter expects
a list of dict-like records sharing their keys. If a command returned

[{'method': 'wdro', 'objective': 8123.4567891}, {'method': 'ro', 'objective': None}]

the formatter would print

+--------+-----------+
| Method | Objective |
+--------+-----------+
| wdro   | 8123.46   |
| ro     | -         |
+--------+-----------+

Floats are printed with six significant digits and missing values as a dash.
"""

from collections import OrderedDict
import math

from wdro_opf.formatters.output_formatter import OutputFormatter


def format_cell(value) -> str:
    """The text of one table cell"""

    if value is None or (isinstance(value, float) and math.isnan(value)):
        return '-'
    if isinstance(value, float):
        return f'{value:.6g}'
    return str(value)


class TableFormat(OutputFormatter):  # pylint: disable=too-few-public-methods
    """Print a list of records as a table, one row per record"""

    def format_output(self, results):
        """Print 'No records' when there are none, else the table"""

        if not results:
            print('No records')
            return

        columns = list(results[0].keys())
        data = [[format_cell(result.get(column)) for column in columns] for result in results]
        self._print_table(columns, data)

    def _print_table(self, headers, data):  # pylint: disable=no-self-use
        col_data = OrderedDict()
        col_widths = []
        for index, heading in enumerate(headers):
            longest = max([len(heading)] + [len(row[index]) for row in data])
            col_widths.append(longest)
            col_data[index] = (heading, longest)

        row_data = [
            OrderedDict((index, (cell, col_widths[index])) for index, cell in enumerate(row))
            for row in data
        ]

        _print_border(col_data)
        _print_data_line(col_data, headers=True)
        _print_border(col_data)
        for row in row_data:
            _print_data_line(row)
        _print_border(col_data)


def _print_border(col_data):
    for _, width in col_data.values():
        print('+', end='')
        print('-' * (width + 2), end='')
    print('+')


def _print_data_line(col_data, headers=False):
    for _, (data, width) in col_data.items():
        if headers:
            data = str(data).title().replace('_', ' ')
        print(f'| {data}', end='')
        print(' ' * (width - len(str(data)) + 1), end='')
    print('|')
