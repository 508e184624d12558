"""
A test module for the wdro_opf.formatters.table_formatter module
"""

import math

import pytest

from wdro_opf.formatters.table_formatter import TableFormat, format_cell


@pytest.mark.parametrize('command_results,expected_table', [
    ([], "No records\n"),
    (
        [{'foo': 'bar', 'baz': 'bleep'}],
        "+-----+-------+\n"
        "| Foo | Baz   |\n"
        "+-----+-------+\n"
        "| bar | bleep |\n"
        "+-----+-------+\n",
    ),
    (
        [{'method': 'wdro', 'objective': 8123.4567891}, {'method': 'ro', 'objective': None}],
        "+--------+-----------+\n"
        "| Method | Objective |\n"
        "+--------+-----------+\n"
        "| wdro   | 8123.46   |\n"
        "| ro     | -         |\n"
        "+--------+-----------+\n",
    ),
    (
        [{'mean_cost': 1.0, 'lowest_reliability': 0.99512}],
        "+-----------+--------------------+\n"
        "| Mean Cost | Lowest Reliability |\n"
        "+-----------+--------------------+\n"
        "| 1         | 0.99512            |\n"
        "+-----------+--------------------+\n",
    ),
])
def test_table_format(command_results, expected_table, capsys):
    """Verify that our formatter gives the results we expect depending on the input"""

    TableFormat().format_output(command_results)
    captured = capsys.readouterr()
    assert captured.out == expected_table


@pytest.mark.parametrize('value, expected', [
    (None, '-'), (math.nan, '-'), (0.123456789, '0.123457'), (1e-9, '1e-09'), (12, '12'), ('ok', 'ok'),
])
def test_format_cell(value, expected):
    """Verify numbers are shortened and missing values dashed"""

    assert format_cell(value) == expected
