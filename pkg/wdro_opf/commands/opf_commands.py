"""
The commands of the wdro-opf program. Each one reads its inputs, runs a piece
of the library and writes its artifacts (strategy JSON, report CSVs) to the
output directory, then returns a summary table for the console.
"""

from concurrent.futures import ProcessPoolExecutor
import json
import logging
import time
from typing import Dict, List

import numpy as np
import pandas as pd

from wdro_opf import WdroOpfError, linresponse
from wdro_opf.arg_types import Choices, Flag, RangedFloat, RangedInt
from wdro_opf.case_io import Network, build_admittance
from wdro_opf.chance import HypercubeInfeasible
from wdro_opf.chance.robust import KINDS
from wdro_opf.commands import CommandError
from wdro_opf.commands.cli_command import command
from wdro_opf.commands.run_config import DEFAULT_CACHE_DIR, DEFAULT_N_MC, DEFAULT_N_SAMPLES, DEFAULT_OUT_DIR, RunConfig
from wdro_opf.formatters import TableFormat
from wdro_opf.opfcore import InfeasibleProblem, OperatingStrategy, strategy_from_json, strategy_to_json
from wdro_opf.rivals import METHODS, solve_method
from wdro_opf.simlab import MODELS, evaluate_strategy, generate_samples, model_accuracy_report, write_samples


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

_GROUPNAME = 'OPF Commands'
DEFAULT_SIZES = (100, 1000, 10000)
DEFAULT_LEVELS = (-32.0, -16.0, 0.0, 16.0, 32.0)

Method = Choices.define(METHODS)
Model = Choices.define(MODELS)
Probability = RangedFloat.define(min=0, max=1, inclusive=False)
Positive = RangedFloat.define(min=0, inclusive=False)
Count = RangedInt.define(min=1)


def _generator_rows(net: Network, strategy: OperatingStrategy) -> List[Dict]:
    base = net.base_mva
    return [
        {
            'bus': gen.bus,
            'pg_mw': strategy.pg[i] * base,
            'qg_mvar': strategy.qg[i] * base,
            'alpha': strategy.alpha[i],
            'r_up_mw': strategy.r_up[i] * base,
            'r_dn_mw': strategy.r_dn[i] * base,
        }
        for i, gen in enumerate(net.generators)
    ]


def _read_strategy(path: str, net: Network):
    try:
        with open(path, encoding='utf-8') as strategy_file:
            return strategy_from_json(strategy_file.read(), net)
    except OSError as exc:
        raise CommandError(f'unable to read the strategy {path}: {exc.strerror}') from exc
    except ValueError as exc:
        raise CommandError(f'{path}: {exc}') from exc


# pylint: disable=too-many-arguments,too-many-locals
@command(group=_GROUPNAME)
def solve(
        case: str,
        samples: str = None,
        protocol: str = None,
        method: Method = 'wdro',
        rho: List[Probability] = (0.05,),
        beta: Probability = 0.9,
        sigma_max: Positive = 10.0,
        n_samples: Count = DEFAULT_N_SAMPLES,
        n_mc: Count = DEFAULT_N_MC,
        seed: int = None,
        relax: List[Choices.define(KINDS)] = (),
        diameter_radius: Flag = False,
        enforce_all: Flag = False,
        dump_matrices: Flag = False,
        cache_dir: str = DEFAULT_CACHE_DIR,
        out: str = DEFAULT_OUT_DIR,
        jobs: Count = 1,
) -> TableFormat:
    """Compute the operating strategy of a case

    The strategy (setpoints, participation factors, reserves) is written as
    JSON to the output directory together with the objective, the enforcement
    rounds and the timings.

    Args:
        case: Network case file (.m or .json).
        samples: CSV of historical forecast errors in MW, one column per farm.
        protocol: JSON sampling protocol to draw the historical errors from.
        method: The formulation.
        rho: Violation probability, one for every family or four (reserve,
            voltage, reactive, flow).
        beta: Confidence level of the Wasserstein balls.
        sigma_max: Half side of the standardized support box.
        n_samples: Historical draws taken from the protocol.
        n_mc: Monte Carlo trials meant for the evaluation of the strategy.
            solve draws none, it only records the number in the strategy file.
        seed: Replaces the seed of the protocol.
        relax: Constraint families solved without chance constraints.
        diameter_radius: Size the Wasserstein balls from the diameter of the
            support instead of the constant estimated from the data.
        enforce_all: Enforce every chance constraint from the first round.
        dump_matrices: Also write the response matrices as CSV to the
            matrices directory of the output.
        cache_dir: Directory of the uncertainty set cache.
        out: Directory the strategy is written to.
        jobs: Worker threads for sizing the uncertainty sets.
    """

    config = RunConfig(
        case=case, samples=samples, protocol=protocol, method=method, rho=tuple(rho), beta=beta,
        sigma_max=sigma_max, n_samples=n_samples, n_mc=n_mc, seed=seed, relax=tuple(relax), fallback=diameter_radius,
        enforce_all=enforce_all, cache_dir=cache_dir, out=out, jobs=jobs,
    )
    net = config.load_network()
    if dump_matrices:
        linresponse.dump_response(
            linresponse.build_response(net, build_admittance(net)), config.out_path('matrices'),
        )
    history = config.load_samples(net)
    strategy, report = solve_method(net, history, config.method_config(net))
    meta = report.as_meta(net)
    meta['config'] = config.canonical()
    meta['config_hash'] = config.config_hash(net, history)
    meta['n_mc'] = config.n_mc
    path = config.out_path(f'strategy-{method}.json')
    with open(path, 'w', encoding='utf-8') as strategy_file:
        strategy_file.write(strategy_to_json(strategy, net, meta))
    if report.objective is not None:
        print(f'Objective {report.objective.bound:.2f} $/h after {report.rounds} rounds, strategy in {path}')
    else:
        print(f'Strategy in {path}')
    return _generator_rows(net, strategy)


def _write_report(config: RunConfig, report, stem: str) -> None:
    report.reliability_frame().to_csv(config.out_path(f'{stem}-reliability.csv'), index=False)
    report.reserve_usage.to_frame().to_csv(config.out_path(f'{stem}-reserve-usage.csv'), index=False)
    for kind, histogram in report.histograms.items():
        frame = histogram.to_frame()
        frame.insert(0, 'constraint', histogram.name)
        frame.to_csv(config.out_path(f'{stem}-{kind}-histogram.csv'), index=False)
    with open(config.out_path(f'{stem}.json'), 'w', encoding='utf-8') as summary_file:
        json.dump(report.summary(), summary_file, indent=2, sort_keys=True)


@command(group=_GROUPNAME)
def evaluate(
        case: str,
        strategy: str,
        samples: str = None,
        protocol: str = None,
        model: Model = 'full-ac',
        n_mc: Count = DEFAULT_N_MC,
        out: str = DEFAULT_OUT_DIR,
        jobs: Count = 1,
) -> TableFormat:
    """Run the Monte Carlo evaluation of a strategy

    The run settings recorded in the strategy file are checked against the
    case and the historical samples given here; a mismatch is refused. The
    out-of-sample errors are drawn from the protocol with the seed after the
    historical one, or read from the sample file.

    Args:
        case: Network case file the strategy was computed on.
        strategy: Strategy JSON written by solve.
        samples: CSV of forecast errors the strategy was computed from.
        protocol: JSON sampling protocol the strategy was computed from.
        model: Response model of the trials.
        n_mc: Number of Monte Carlo trials drawn from the protocol.
        out: Directory the report is written to.
        jobs: Worker processes for the trials.
    """

    seed_config = RunConfig(case=case, samples=samples, protocol=protocol)
    net = seed_config.load_network()
    operating, document = _read_strategy(strategy, net)
    config = RunConfig.from_document(
        document, case=case, samples=samples, protocol=protocol, n_mc=n_mc, out=out, jobs=jobs,
        cache_dir=None,
    )
    history = config.load_samples(net)
    if config.config_hash(net, history) != document.get('config_hash'):
        raise CommandError(
            f'{strategy} was computed from a different case, samples or settings than given here'
        )
    report = evaluate_strategy(net, operating, config.evaluation_samples(net), model=model, jobs=jobs)
    _write_report(config, report, f'evaluation-{operating.method}-{model}')
    return [report.summary()]


def _sweep_cell(config: RunConfig, method: str, size: int, model: str) -> Dict:
    """Solve and evaluate one method at one sample size"""

    row = {'method': method, 'n_samples': size, 'status': 'ok'}
    started = time.perf_counter()
    try:
        net = config.load_network()
        history = config.load_samples(net, size)
        strategy, report = solve_method(net, history, config.method_config(net, method))
        row['solve_s'] = time.perf_counter() - started
        evaluation = evaluate_strategy(net, strategy, config.evaluation_samples(net), model=model)
    except (InfeasibleProblem, HypercubeInfeasible) as exc:
        LOGGER.info('%s with %d samples is infeasible: %s', method, size, exc)
        row['status'] = 'Infeasible'
        return row
    except WdroOpfError as exc:
        LOGGER.warning('%s with %d samples failed: %s', method, size, exc)
        row['status'] = 'Error'
        return row
    base = net.base_mva
    row.update({
        'objective': report.objective.bound if report.objective is not None else None,
        'simulated_cost': evaluation.mean_cost,
        'reserve_up_mw': float(np.sum(strategy.r_up) * base),
        'reserve_dn_mw': float(np.sum(strategy.r_dn) * base),
        'lowest_reliability': evaluation.lowest[1],
        'standard_error': evaluation.standard_error,
    })
    return row


_COLUMNS = (
    'method', 'n_samples', 'status', 'objective', 'simulated_cost', 'reserve_up_mw', 'reserve_dn_mw',
    'lowest_reliability', 'standard_error', 'solve_s',
)


def sweep_table(config: RunConfig, methods: List[str], sizes: List[int], model: str = 'approx') -> List[Dict]:
    """Solve and evaluate every method at every sample size.

    Args:
        config: The run settings; it must name a protocol.
        methods: The formulations to compare.
        sizes: Historical sample sizes.
        model: Response model of the evaluation.

    Returns:
        One row per method and size, failed cells marked in their status.
    """

    if not config.protocol:
        raise CommandError('a sweep draws its samples, it needs --protocol')
    cells = [(method, size) for method in methods for size in sizes]
    if config.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_sweep_cell, config, method, size, model) for method, size in cells]
            rows = [future.result() for future in futures]
    else:
        rows = [_sweep_cell(config, method, size, model) for method, size in cells]
    return [{column: row.get(column) for column in _COLUMNS} for row in rows]


@command(group=_GROUPNAME)
def sweep(
        case: str,
        protocol: str,
        methods: List[Method] = METHODS,
        sizes: List[RangedInt.define(min=2)] = DEFAULT_SIZES,
        model: Model = 'approx',
        rho: List[Probability] = (0.05,),
        beta: Probability = 0.9,
        sigma_max: Positive = 10.0,
        n_mc: Count = DEFAULT_N_MC,
        seed: int = None,
        cache_dir: str = DEFAULT_CACHE_DIR,
        out: str = DEFAULT_OUT_DIR,
        jobs: Count = 1,
) -> TableFormat:
    """Compare methods across historical sample sizes

    Every cell solves one method with one sample size and evaluates the result
    on the same out-of-sample draw. Cells that are infeasible or fail are kept
    in the table with their status. The table is also written as sweep.csv.

    Args:
        case: Network case file.
        protocol: JSON sampling protocol of both the history and the evaluation.
        methods: The formulations to compare.
        sizes: Historical sample sizes.
        model: Response model of the evaluation.
        rho: Violation probability, one or four values.
        beta: Confidence level of the Wasserstein balls.
        sigma_max: Half side of the standardized support box.
        n_mc: Number of Monte Carlo trials.
        seed: Replaces the seed of the protocol.
        cache_dir: Directory of the uncertainty set cache.
        out: Directory the table is written to.
        jobs: Cells computed at the same time.
    """

    config = RunConfig(
        case=case, protocol=protocol, rho=tuple(rho), beta=beta, sigma_max=sigma_max, n_mc=n_mc, seed=seed,
        cache_dir=cache_dir, out=out, jobs=jobs,
    )
    rows = sweep_table(config, list(methods), list(sizes), model)
    pd.DataFrame(rows, columns=list(_COLUMNS)).to_csv(config.out_path('sweep.csv'), index=False)
    return rows


@command(group=_GROUPNAME)
def generate(
        case: str,
        protocol: str,
        n_samples: Count = DEFAULT_N_SAMPLES,
        seed: int = None,
        out: str = DEFAULT_OUT_DIR,
) -> TableFormat:
    """Draw forecast errors from a protocol and write them as CSV

    Args:
        case: Network case file, for the wind farms.
        protocol: JSON sampling protocol.
        n_samples: Number of draws.
        seed: Replaces the seed of the protocol.
        out: Directory the samples are written to.
    """

    config = RunConfig(case=case, protocol=protocol, n_samples=n_samples, seed=seed, out=out)
    net = config.load_network()
    drawn = generate_samples(config.load_protocol(), net.wind_farms, n_samples)
    path = config.out_path(f'samples-{n_samples}.csv')
    write_samples(drawn, path, net.base_mva)
    print(f'Wrote {n_samples} samples to {path}')
    base = net.base_mva
    return [
        {
            'farm': label,
            'mean_mw': float(np.mean(drawn.data[:, j])) * base,
            'std_mw': float(np.std(drawn.data[:, j])) * base,
            'min_mw': float(np.min(drawn.data[:, j])) * base,
            'max_mw': float(np.max(drawn.data[:, j])) * base,
        }
        for j, label in enumerate(drawn.labels)
    ]


@command(group=_GROUPNAME)
def accuracy(
        case: str,
        strategy: str,
        levels: List[float] = DEFAULT_LEVELS,
        out: str = DEFAULT_OUT_DIR,
) -> TableFormat:
    """Compare the response models at fixed total forecast errors

    Cost, voltage, reactive and flow tables are written as CSV, with the
    values of the exact AC response and the error of each model.

    Args:
        case: Network case file the strategy was computed on.
        strategy: Strategy JSON written by solve.
        levels: Total forecast errors in MW, spread over the farms by capacity.
        out: Directory the tables are written to.
    """

    config = RunConfig(case=case, out=out)
    net = config.load_network()
    operating, _ = _read_strategy(strategy, net)
    tables = model_accuracy_report(net, operating, [level / net.base_mva for level in levels])
    for name, frame in tables.items():
        frame.to_csv(config.out_path(f'accuracy-{name}.csv'), index=False)
    return tables['cost'].to_dict('records')


__all__ = ['accuracy', 'evaluate', 'generate', 'solve', 'sweep', 'sweep_table']
