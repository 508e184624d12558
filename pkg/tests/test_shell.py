"""
A test module for the wdro_opf.shell module
"""

import logging

import pytest

import wdro_opf
from wdro_opf import shell
from wdro_opf.case_io import CaseParseError
from wdro_opf.opfcore import EnforcementLimit, InfeasibleProblem, SolverFailure


@pytest.mark.parametrize("argv, expected_code, expected_output", [
    (["ut", "--arg", "2"], 0, ""),
    (["ut"], 4, "required: --arg"),
    (["ut", "--arg", "foo"], 4, "invalid int value"),
    (["ut", "--arg", "5"], 1, "This is a UT failure"),
    (["ut", "--arg", "6"], 2, "no relaxation helps"),
    (["ut", "--arg", "7"], 3, "did not converge"),
    (["ut", "--arg", "8"], 4, "line 3"),
    (["ut", "--arg", "9"], 3, "after 20 enforcement rounds"),
    (["bad"], 1, "Unknown command"),
])
def test_exit_codes(argv, expected_code, expected_output, clean_registry, capsys):
    """Verify the outcome of a command becomes its exit status"""

    @wdro_opf.command(name="ut")
    def ut_command(arg: int):  # pylint: disable=unused-variable
        if arg == 5:
            raise ValueError("This is a UT failure")
        if arg == 6:
            raise InfeasibleProblem("no relaxation helps")
        if arg == 7:
            raise SolverFailure("the method did not converge", {})
        if arg == 8:
            raise CaseParseError("bad number on line 3")
        if arg == 9:
            raise EnforcementLimit(20, ["voltage:11", "flow:4-5#6"])

    assert shell.main(argv) == expected_code
    captured = capsys.readouterr()
    assert expected_output in captured.out + captured.err


def test_version(capsys):
    """Verify --version prints the program and its version"""

    assert shell.main(['--version']) == 0
    assert capsys.readouterr().out.strip() == f'wdro-opf {wdro_opf.__version__}'


@pytest.mark.parametrize("argv, expected_output", [
    ([], 'usage: wdro-opf <command>'),
    (['--help'], 'OPF Commands'),
    (['help'], 'Built-in Commands'),
    (['help', 'solve'], 'usage: wdro-opf solve --case <case>'),
    (['solve', '--help'], 'Compute the operating strategy of a case'),
])
def test_help(argv, expected_output, capsys):
    """Verify every spelling of help prints the help and succeeds"""

    assert shell.main(argv) == 0
    assert expected_output in capsys.readouterr().out


def test_missing_case(tmp_path, capsys):
    """Verify a case file that can't be read is an input error"""

    code = shell.main(['solve', '--case', str(tmp_path / 'none.m'), '--cache-dir', str(tmp_path)])
    assert code == shell.EXIT_INPUT
    assert 'unable to read' in capsys.readouterr().err


@pytest.mark.parametrize("level, expected", [("debug", logging.DEBUG), ("nonsense", logging.WARNING)])
def test_log_level(level, expected, monkeypatch):
    """Verify the environment picks the log level and a bad name falls back"""

    calls = {}
    monkeypatch.setenv(shell.LOG_LEVEL_ENV, level)
    monkeypatch.setattr(logging, 'basicConfig', lambda **kwargs: calls.update(kwargs))
    shell.configure_logging()
    assert calls['level'] == expected
