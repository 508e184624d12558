"""
This module provides the DC-OPF benchmark. Voltage magnitudes are taken as
1 p.u., reactive power and losses are ignored and a branch carries
f_k = (θ_i − θ_j) / (x_k τ_k). The power balance becomes linear, B θ = C_g p^g − p_net,
and the response of the flows to the AGC and to the wind is given by the
power transfer distribution factors (PTDF) with the reference bus absorbing
the imbalance.

The data-driven chance constraints are kept on flows and on the reserve, which
makes the strategy comparable with the AC-based one. Phase shift angles are
ignored.
"""

from dataclasses import replace
import logging
from typing import List, Tuple

import numpy as np
from scipy import linalg, sparse

from wdro_opf.case_io import AdmittanceSet, Network, build_admittance
from wdro_opf.chance import RobustRow
from wdro_opf.linresponse import Partition, ResponseMatrices, SingularPartitionError
from wdro_opf.opfcore import NlpProblem, assemble
from wdro_opf.opfcore.enforcement import EnforcementReport, SolveContext, enforce, initial_point, prepare
from wdro_opf.opfcore.strategy import OperatingStrategy
from wdro_opf.rivals.methods import MethodConfig
from wdro_opf.wasserstein import SampleSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


def dc_matrices(net: Network) -> Tuple[np.ndarray, np.ndarray]:
    """The bus susceptance matrix B and the branch flow map B_f of the DC
    model, p = Bθ and f = B_f θ. Out-of-service branches get zero rows.
    """

    index = net.bus_index
    flow_map = np.zeros((net.n_branch, net.n_bus))
    incidence = np.zeros((net.n_branch, net.n_bus))
    for k, branch in enumerate(net.branches):
        if not branch.in_service:
            continue
        susceptance = 1.0 / (branch.x * branch.ratio)
        i, j = index[branch.from_bus], index[branch.to_bus]
        flow_map[k, i], flow_map[k, j] = susceptance, -susceptance
        incidence[k, i], incidence[k, j] = 1.0, -1.0
    return incidence.T @ flow_map, flow_map


def _ptdf(net: Network, b_bus: np.ndarray, flow_map: np.ndarray) -> np.ndarray:
    others = np.array([i for i in range(net.n_bus) if i != net.ref], dtype=int)
    ptdf = np.zeros((net.n_branch, net.n_bus))
    if not len(others):
        return ptdf
    try:
        ptdf[:, others] = linalg.solve(b_bus[np.ix_(others, others)], flow_map[:, others].T, assume_a='sym').T
    except linalg.LinAlgError as exc:
        raise SingularPartitionError(f'the DC susceptance matrix of {net.name} is singular') from exc
    return ptdf


def dc_response(net: Network) -> ResponseMatrices:
    """Response matrices of the DC model: only the flows respond, through the PTDF"""

    b_bus, flow_map = dc_matrices(net)
    ptdf = _ptdf(net, b_bus, flow_map)
    no_bus_rows = np.zeros((0, net.n_bus))
    no_farm_rows = np.zeros((0, net.n_wind))
    empty = np.zeros((0, 0))
    return ResponseMatrices(
        av=no_bus_rows, bv=no_farm_rows, aq=no_bus_rows, bq=no_farm_rows,
        af=-ptdf, bf=ptdf @ net.wind_incidence(),
        h=empty, n=empty, m=empty, l=empty,
        partition=Partition.from_network(net), gen_matrix=net.gen_incidence(),
        flow_theta=flow_map, flow_v=np.zeros((net.n_branch, net.n_bus)),
        linearization='dc',
        labels={
            'buses': [bus.bus_id for bus in net.buses],
            'branches': [f'{br.from_bus}-{br.to_bus}' for br in net.branches],
            'farms': [f'wind@{farm.bus}' for farm in net.wind_farms],
        },
    )


class DcProblem(NlpProblem):
    """The OPF of an assembled problem with its power balance replaced by the
    DC one. Magnitudes stay in the layout fixed at 1 p.u. and reactive outputs
    fixed at 0, so every row and bound of the AC problem carries over.
    """

    def __init__(self, base: NlpProblem, b_bus: np.ndarray):
        layout = base.layout
        x_lower, x_upper = base.x_lower.copy(), base.x_upper.copy()
        x_lower[layout['v']] = x_upper[layout['v']] = 1.0
        x_lower[layout['qg']] = x_upper[layout['qg']] = 0.0
        super().__init__(
            base.net, base.adm, layout, base.cost, base.cost_rows, base.a_matrix,
            base.row_lower, base.row_upper, base.row_names, x_lower, x_upper,
        )
        n_bus, n_gen = layout.n_bus, layout.n_gen
        self.b_bus = sparse.csr_matrix(b_bus)
        self._jacobian = sparse.hstack([
            self.b_bus, sparse.csr_matrix((n_bus, n_bus)), -self.gen_matrix,
            sparse.csr_matrix((n_bus, layout.size - 2 * n_bus - n_gen)),
        ], format='csr')

    @property
    def n_eq(self) -> int:
        return self.layout.n_bus

    def equalities(self, x: np.ndarray):
        """Bθ − C_g p^g + p_net and its constant Jacobian"""

        return self._jacobian @ x + self.p_net, self._jacobian

    def equality_hessian(self, x: np.ndarray, lam: np.ndarray) -> sparse.csr_matrix:  # pylint: disable=unused-argument
        return sparse.csr_matrix((self.size, self.size))


def dc_opf(
        net: Network,
        samples: SampleSet,
        config: MethodConfig = None,
        adm: AdmittanceSet = None,
) -> Tuple[OperatingStrategy, EnforcementReport]:
    """Compute the DC strategy with Wasserstein chance constraints on flows
    and reserves.

    Args:
        net: The network.
        samples: Forecast errors, one column per wind farm, or None.
        config: Method settings; DC with the defaults when not given.
        adm: Admittance structures, built when not given.
    """

    config = config or MethodConfig(method='dc')
    settings = replace(config.settings, method='dc')
    adm = adm or build_admittance(net)
    b_bus, _ = dc_matrices(net)
    start = initial_point(net, adm)
    start = replace(start, v=np.ones(net.n_bus), qg=np.zeros(net.n_gen))

    def assembler(ctx: SolveContext, rows: List[RobustRow]) -> NlpProblem:
        return DcProblem(assemble(ctx.net, ctx.adm, ctx.rm, rows, ctx.omega), b_bus)

    ctx = prepare(net, samples, settings, adm, rm=dc_response(net), start=start, kinds=('flow',))
    ctx.assembler = assembler
    return enforce(ctx, settings)
