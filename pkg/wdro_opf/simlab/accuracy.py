"""
This module compares the response models at fixed total forecast errors. For
each level the error is spread over the wind farms in proportion to their
capacities and the operating cost, the PQ voltages, the regulated reactive
outputs and the branch flows are computed by the exact AC response, the
approximate model and the linear power flow model (and the DC model for
flows). Errors are taken against the exact AC values.
"""

import logging
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from wdro_opf.acgrid import PowerFlowDivergence, SingularJacobianError
from wdro_opf.case_io import AdmittanceSet, Network, build_admittance
from wdro_opf.opfcore.strategy import OperatingStrategy
from wdro_opf.simlab.evaluation import ModelEvaluator


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

LINEAR_MODELS = ('approx', 'lpf')


def error_profile(net: Network, level: float) -> np.ndarray:
    """Spread a total forecast error (p.u.) over the farms by capacity"""

    capacity = net.array('wind_farms', 'capacity')
    if not len(capacity) or capacity.sum() <= 0:
        return np.zeros(len(capacity))
    return level * capacity / capacity.sum()


def _quantity_rows(level_mw, labels, exact, predicted: Dict[str, np.ndarray], scale) -> list:
    rows = []
    for position, label in enumerate(labels):
        row = {'level_mw': level_mw, 'quantity': label, 'full_ac': exact[position] * scale}
        for model, values in predicted.items():
            row[model] = values[position] * scale
            row[f'{model}_error'] = (values[position] - exact[position]) * scale
        rows.append(row)
    return rows


# pylint: disable=too-many-locals
def model_accuracy_report(
        net: Network,
        strategy: OperatingStrategy,
        levels: Sequence[float],
        adm: AdmittanceSet = None,
) -> Dict[str, pd.DataFrame]:
    """Tabulate cost, voltage, reactive and flow values of every model.

    Args:
        net: The network.
        strategy: The operating strategy the response starts from.
        levels: Total forecast errors (p.u.).
        adm: Admittance structures, built when not given.

    Returns:
        DataFrames keyed 'cost' (in $/h, relative errors in %), 'voltage'
        (p.u., absolute errors), 'reactive' (MVAr) and 'flow' (MW, every
        in-service branch, with the DC model).
    """

    adm = adm or build_admittance(net)
    branches = [k for k, branch in enumerate(net.branches) if branch.in_service]
    evaluators = {
        model: ModelEvaluator.build(net, strategy, model, adm, branches=branches)
        for model in ('full-ac',) + LINEAR_MODELS + ('dc',)
    }
    exact = evaluators['full-ac']
    voltage_at = exact.positions('voltage')
    reactive_at = exact.positions('reactive')
    flow_at = exact.positions('flow')
    dc_flow_at = evaluators['dc'].positions('flow')
    voltage_labels = [exact.constraints[j].cid.split(':', 1)[1] for j in voltage_at]
    reactive_labels = [exact.constraints[j].cid.split(':', 1)[1] for j in reactive_at]
    flow_labels = [exact.constraints[j].cid.split(':', 1)[1] for j in flow_at]
    base = net.base_mva

    tables = {'cost': [], 'voltage': [], 'reactive': [], 'flow': []}
    for level in levels:
        zeta = error_profile(net, level)
        level_mw = level * base
        try:
            ac_values, ac_pg = exact.ac_values(zeta)
        except (PowerFlowDivergence, SingularJacobianError) as exc:
            LOGGER.warning('Skipping the error level %.2f MW, the AC response failed: %s', level_mw, exc)
            continue
        ac_cost = float(exact.generation_cost(ac_pg)[0]) + exact.reserve_cost()

        predicted = {}
        cost_row = {'level_mw': level_mw, 'full_ac': ac_cost}
        for model in LINEAR_MODELS:
            values, pg = evaluators[model].linear_values(zeta[None, :])
            predicted[model] = values[0]
            cost = float(evaluators[model].generation_cost(pg)[0]) + evaluators[model].reserve_cost()
            cost_row[model] = cost
            cost_row[f'{model}_error_pct'] = 100.0 * (cost - ac_cost) / ac_cost if ac_cost else 0.0
        tables['cost'].append(cost_row)

        tables['voltage'] += _quantity_rows(
            level_mw, voltage_labels, ac_values[voltage_at],
            {model: predicted[model][voltage_at] for model in LINEAR_MODELS}, 1.0,
        )
        tables['reactive'] += _quantity_rows(
            level_mw, reactive_labels, ac_values[reactive_at],
            {model: predicted[model][reactive_at] for model in LINEAR_MODELS}, base,
        )
        dc_values, _ = evaluators['dc'].linear_values(zeta[None, :])
        flows = {model: predicted[model][flow_at] for model in LINEAR_MODELS}
        flows['dc'] = dc_values[0][dc_flow_at]
        tables['flow'] += _quantity_rows(level_mw, flow_labels, ac_values[flow_at], flows, base)
        LOGGER.debug('Compared the models at %.2f MW', level_mw)

    return {name: pd.DataFrame(rows) for name, rows in tables.items()}
