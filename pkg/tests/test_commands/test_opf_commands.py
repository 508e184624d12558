"""
A test module for the wdro_opf.commands.opf_commands module
"""

import json
import logging
import os

import pandas as pd
import pytest

from wdro_opf import shell
from wdro_opf.commands import CommandError, opf_commands
from wdro_opf.commands.run_config import CACHE_ENV, RunConfig


@pytest.fixture(autouse=True)
def no_cache_env(monkeypatch):
    """Keep the caller's cache directory out of these tests"""

    monkeypatch.delenv(CACHE_ENV, raising=False)


@pytest.fixture(scope='module')
def solved(tmp_path_factory, ieee14_wind_path):
    """A WDRO strategy file of the 14-bus wind case and its protocol"""

    root = tmp_path_factory.mktemp('solved')
    protocol = root / 'protocol.json'
    protocol.write_text('{"distribution": "laplace", "seed": 7}', encoding='utf-8')
    out = root / 'out'
    with pytest.MonkeyPatch.context() as patch:
        patch.delenv(CACHE_ENV, raising=False)
        rows = opf_commands.solve(
            case=ieee14_wind_path, protocol=str(protocol), n_samples=200, out=str(out),
            cache_dir=str(root / 'cache'), dump_matrices=True, n_mc=500,
        )
    return {'rows': rows, 'protocol': str(protocol), 'out': out, 'cache': root / 'cache'}


def test_solve_writes_strategy(solved):
    """Verify the strategy file carries the settings, the report and the generators"""

    assert [row['bus'] for row in solved['rows']] == [1, 2, 3, 6, 8]
    assert sum(row['alpha'] for row in solved['rows']) == pytest.approx(1.0, abs=1e-6)
    document = json.loads((solved['out'] / 'strategy-wdro.json').read_text(encoding='utf-8'))
    assert document['method'] == 'wdro'
    assert document['config']['n_samples'] == 200
    assert len(document['config_hash']) == 64
    assert document['n_mc'] == 500
    assert 'n_mc' not in document['config']
    assert set(document['enforcement']) == {'rounds', 'enforced', 'iterations'}
    assert document['objective']['exact'] <= document['objective']['bound'] + 1e-6
    assert len(os.listdir(solved['cache'])) == 1
    assert sorted(os.listdir(solved['out'] / 'matrices')) == ['af.csv', 'aq.csv', 'av.csv', 'bf.csv', 'bq.csv', 'bv.csv']


def test_evaluate(solved, ieee14_wind_path, tmp_path):
    """Verify a strategy is evaluated on the draw after its history"""

    strategy = str(solved['out'] / 'strategy-wdro.json')
    rows = opf_commands.evaluate(
        case=ieee14_wind_path, strategy=strategy, protocol=solved['protocol'], model='approx', n_mc=100,
        out=str(tmp_path),
    )
    assert rows[0]['trials'] == 100
    assert rows[0]['model'] == 'approx'
    assert 0.0 <= rows[0]['lowest_reliability'] <= 1.0
    reliability = pd.read_csv(tmp_path / 'evaluation-wdro-approx-reliability.csv')
    assert list(reliability.columns) == ['constraint', 'kind', 'lower', 'upper', 'reliability']
    assert (tmp_path / 'evaluation-wdro-approx-reserve-usage.csv').exists()


def test_evaluate_refuses_other_history(solved, ieee14_wind_path, tmp_path):
    """Verify a strategy isn't evaluated against samples it wasn't computed from"""

    other = tmp_path / 'other.json'
    other.write_text('{"distribution": "laplace", "seed": 8}', encoding='utf-8')
    with pytest.raises(CommandError, match='different case, samples or settings'):
        opf_commands.evaluate(
            case=ieee14_wind_path, strategy=str(solved['out'] / 'strategy-wdro.json'),
            protocol=str(other), model='approx', n_mc=10, out=str(tmp_path),
        )


def test_missing_strategy(ieee14_wind_path, tmp_path):
    """Verify an unreadable strategy file is an input error"""

    with pytest.raises(CommandError, match='unable to read the strategy'):
        opf_commands.accuracy(case=ieee14_wind_path, strategy=str(tmp_path / 'none.json'), out=str(tmp_path))


def test_accuracy(solved, ieee14_wind_path, tmp_path):
    """Verify the accuracy tables are written and the cost table returned"""

    rows = opf_commands.accuracy(
        case=ieee14_wind_path, strategy=str(solved['out'] / 'strategy-wdro.json'), levels=[0.0, 10.0],
        out=str(tmp_path),
    )
    assert [row['level_mw'] for row in rows] == pytest.approx([0.0, 10.0])
    for name in ('cost', 'voltage', 'reactive', 'flow'):
        assert (tmp_path / f'accuracy-{name}.csv').exists()


def test_generate(ieee14_wind_path, protocol_path, tmp_path, capsys):
    """Verify drawn samples are written in MW and summarized per farm"""

    rows = opf_commands.generate(case=ieee14_wind_path, protocol=protocol_path, n_samples=20, out=str(tmp_path))
    assert [row['farm'] for row in rows] == ['wind@11', 'wind@12', 'wind@13', 'wind@14']
    assert all(-18.0 - 1e-9 <= row['min_mw'] <= row['max_mw'] <= 18.0 + 1e-9 for row in rows)
    frame = pd.read_csv(tmp_path / 'samples-20.csv')
    assert frame.shape == (20, 4)
    assert 'Wrote 20 samples' in capsys.readouterr().out


def test_sweep_needs_protocol(ieee14_wind_path):
    """Verify a sweep can't run from a fixed sample file"""

    with pytest.raises(CommandError, match='needs --protocol'):
        opf_commands.sweep_table(RunConfig(case=ieee14_wind_path, cache_dir=None), ['wdro'], [100])


def test_sweep_cell(ieee14_wind_path, protocol_path):
    """Verify one cell of a sweep reports the strategy and its evaluation"""

    config = RunConfig(case=ieee14_wind_path, protocol=protocol_path, n_mc=50, cache_dir=None)
    rows = opf_commands.sweep_table(config, ['dc'], [100])
    assert len(rows) == 1
    row = rows[0]
    assert row['method'] == 'dc'
    assert row['n_samples'] == 100
    assert row['status'] == 'ok'
    assert row['reserve_up_mw'] >= 0
    assert list(row) == list(opf_commands._COLUMNS)  # pylint: disable=protected-access


def test_empty_sweep(ieee14_wind_path, protocol_path):
    """Verify a sweep without methods is an empty table"""

    config = RunConfig(case=ieee14_wind_path, protocol=protocol_path, cache_dir=None)
    assert opf_commands.sweep_table(config, [], [100]) == []


def test_empty_sweep_from_the_command_line(ieee14_wind_path, protocol_path, tmp_path, capsys):
    """Verify --methods may be given without values and gives an empty table"""

    out = str(tmp_path / "out")
    argv = ["sweep", "--case", ieee14_wind_path, "--protocol", protocol_path, "--methods", "--out", out]
    assert shell.main(argv) == 0
    assert "No records" in capsys.readouterr().out
    assert pd.read_csv(os.path.join(out, "sweep.csv")).empty


def test_solve_with_warm_cache(solved, ieee14_wind_path, tmp_path, caplog):
    """Verify a second solve reads its uncertainty sets from the cache and agrees"""

    caplog.set_level(logging.INFO, logger='wdro_opf.chance.cache')
    opf_commands.solve(
        case=ieee14_wind_path, protocol=solved['protocol'], n_samples=200, out=str(tmp_path),
        cache_dir=str(solved['cache']),
    )
    assert 'uncertainty sets from cache' in caplog.text
    first = json.loads((solved['out'] / 'strategy-wdro.json').read_text(encoding='utf-8'))
    second = json.loads((tmp_path / 'strategy-wdro.json').read_text(encoding='utf-8'))
    assert second['config_hash'] == first['config_hash']
    assert second['objective']['bound'] == pytest.approx(first['objective']['bound'], rel=1e-9)
