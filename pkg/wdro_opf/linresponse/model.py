"""
This module builds the linear power flow model and the response matrices.

Both the linear power flow and the incremental response are written with one
model matrix K, where [p; q] = −K [θ; v]. For the linear power flow model

    K = [[B′, −G],
         [G,   B]]

and for a linearization at an operating point K is minus the exact power flow
Jacobian there. Picking the rows and columns of K by bus class gives the blocks

    H = K[(p_S, p_L, q_L), (θ_R, v_R, v_S)]     N = K[(p_S, p_L, q_L), (θ_S, θ_L, v_L)]
    M = K[q_{R∪S},         (θ_R, v_R, v_S)]     L = K[q_{R∪S},         (θ_S, θ_L, v_L)]

With the regulated voltages held, [Δθ_S; Δθ_L; Δv_L] = −N⁻¹[Δp_S; Δp_L; Δq_L]
and Δq_{R∪S} = L N⁻¹ [Δp_S; Δp_L; Δq_L]. The injection pattern of the affine AGC
policy is Δp_S = −(1ᵀζ)α_S + ζ_S, Δp_L = ζ_L and Δq_L = σζ_L, which splits every
response into a part proportional to (1ᵀζ)α and a part proportional to ζ.
"""

from dataclasses import dataclass
import logging
import os
from typing import TYPE_CHECKING, Dict, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, sparse

from wdro_opf.acgrid import SystemState, branch_flow_derivatives, power_derivatives
from wdro_opf.case_io import AdmittanceSet, Network
from wdro_opf.linresponse import SingularPartitionError
from wdro_opf.linresponse.partition import Partition

if TYPE_CHECKING:
    from wdro_opf.opfcore.strategy import OperatingStrategy


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

LINEARIZATIONS = ('lpf', 'jacobian')
COND_LIMIT = 1e14


def lpf_model(adm: AdmittanceSet) -> np.ndarray:
    """The model matrix of the linear power flow, [[B′, −G], [G, B]]"""

    return np.block([[adm.b_prime, -adm.g], [adm.g, adm.b]])


def jacobian_model(state: SystemState, adm: AdmittanceSet) -> np.ndarray:
    """Minus the exact power flow Jacobian at an operating point"""

    ds_dva, ds_dvm = power_derivatives(state.complex_voltage, adm.ybus)
    jacobian = sparse.bmat([[ds_dva.real, ds_dvm.real], [ds_dva.imag, ds_dvm.imag]])
    return -jacobian.toarray()


def _factor(n_block: np.ndarray, partition: Partition):
    if n_block.size == 0:
        return None
    cond = np.linalg.cond(n_block)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularPartitionError(
            f'the block N is singular (condition {cond:.3e}) for partition {partition.describe()}'
        )
    return linalg.lu_factor(n_block)


def lpf_solve(
        adm: AdmittanceSet,
        partition: Partition,
        p: np.ndarray,
        q: np.ndarray,
        v_set: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Solve the linear power flow [p; q] = −[B′ −G; G B][θ; v] with the
    reference angle at zero and the reference and PV voltages at their setpoints.

    Args:
        adm: Admittance structures.
        partition: Bus classes.
        p: Net active injection of every bus.
        q: Net reactive injection of every bus (only PQ entries are used).
        v_set: Voltage magnitudes (only reference and PV entries are used).
    """

    model = lpf_model(adm)
    rows = partition.balance_rows()
    unknown = partition.unknown_columns()
    fixed = partition.fixed_columns()
    n_block = model[np.ix_(rows, unknown)]
    h_block = model[np.ix_(rows, fixed)]
    lu_piv = _factor(n_block, partition)

    n = partition.n_bus
    x_full = np.zeros(2 * n)
    x_full[n + np.array(partition.regulated)] = v_set[partition.regulated]
    injected = np.concatenate([p, q])[rows]
    x_full[unknown] = linalg.lu_solve(lu_piv, -injected - h_block @ x_full[fixed])
    return x_full[:n], x_full[n:]


@dataclass(frozen=True, eq=False)
class ResponseMatrices:  # pylint: disable=too-many-instance-attributes
    """The response of the monitored quantities to (1ᵀζ)α and to ζ.

    Attributes:
        av, bv: PQ-bus voltage deviations, |L| x n_bus and |L| x n_wind.
        aq, bq: Reactive output deviations at R ∪ S.
        af, bf: Line flow deviations, n_branch rows.
        h, n, m, l: The blocks of the model matrix.
        partition: Bus classes used to build the blocks.
        gen_matrix: n_bus x n_gen generator placement, maps α to buses.
        flow_theta, flow_v: The nominal linear flow map f = flow_theta θ + flow_v v.
        linearization: 'lpf' or 'jacobian'.
        labels: Row and column labels for reporting.
    """

    av: np.ndarray
    bv: np.ndarray
    aq: np.ndarray
    bq: np.ndarray
    af: np.ndarray
    bf: np.ndarray
    h: np.ndarray
    n: np.ndarray
    m: np.ndarray
    l: np.ndarray
    partition: Partition
    gen_matrix: np.ndarray
    flow_theta: np.ndarray
    flow_v: np.ndarray
    linearization: str
    labels: Dict[str, list]

    def nominal_flows(self, theta: np.ndarray, v: np.ndarray) -> np.ndarray:
        """The linear nominal flow of every branch"""

        return self.flow_theta @ theta + self.flow_v @ v

    def alpha_coefficients(self, kind: str) -> np.ndarray:
        """Response to (1ᵀζ) per unit of each generator's participation factor"""

        return getattr(self, f'a{kind}') @ self.gen_matrix


# pylint: disable=too-many-locals,too-many-arguments
def build_response(
        net: Network,
        adm: AdmittanceSet,
        partition: Partition = None,
        linearization: str = 'lpf',
        state: SystemState = None,
) -> ResponseMatrices:
    """Build the response matrices of a network.

    Args:
        net: The network, which also gives the wind farm buses and power factors.
        adm: Its admittance structures.
        partition: Bus classes; taken from the network when not given.
        linearization: 'lpf' for the constant linear power flow model, or
            'jacobian' for the exact Jacobian at `state`.
        state: The operating point of the 'jacobian' linearization.
    """

    if partition is None:
        partition = Partition.from_network(net)
    if linearization == 'lpf':
        model = lpf_model(adm)
        flow_theta, flow_v = adm.b_line, -adm.g_line
    elif linearization == 'jacobian':
        if state is None:
            raise ValueError('the jacobian linearization needs an operating point')
        model = jacobian_model(state, adm)
        dpf_dva, dpf_dvm = branch_flow_derivatives(state.complex_voltage, adm)
        flow_theta, flow_v = dpf_dva.toarray(), dpf_dvm.toarray()
    else:
        raise ValueError(f'unknown linearization "{linearization}"')

    n_bus = partition.n_bus
    n_pv, n_pq = len(partition.pv), len(partition.pq)
    rows = partition.balance_rows()
    q_rows = partition.regulated_q_rows()
    unknown = partition.unknown_columns()
    fixed = partition.fixed_columns()
    h_block = model[np.ix_(rows, fixed)]
    n_block = model[np.ix_(rows, unknown)]
    m_block = model[np.ix_(q_rows, fixed)]
    l_block = model[np.ix_(q_rows, unknown)]
    lu_piv = _factor(n_block, partition)

    # injection pattern of the affine policy
    e_alpha = np.zeros((len(rows), n_bus))
    e_alpha[np.arange(n_pv), partition.pv] = -1.0
    e_zeta = np.zeros((len(rows), net.n_wind))
    pv_row = {bus: k for k, bus in enumerate(partition.pv)}
    pq_row = {bus: k for k, bus in enumerate(partition.pq)}
    for farm_index, (farm, bus) in enumerate(zip(net.wind_farms, net.wind_bus)):
        if bus in pv_row:
            e_zeta[pv_row[bus], farm_index] += 1.0
        elif bus in pq_row:
            e_zeta[n_pv + pq_row[bus], farm_index] += 1.0
            e_zeta[n_pv + n_pq + pq_row[bus], farm_index] += farm.tan_phi

    if lu_piv is None:
        du_alpha = np.zeros((0, n_bus))
        du_zeta = np.zeros((0, net.n_wind))
    else:
        du_alpha = -linalg.lu_solve(lu_piv, e_alpha)
        du_zeta = -linalg.lu_solve(lu_piv, e_zeta)

    # lift the unknowns (θ_S, θ_L, v_L) back to full (θ, v) vectors
    lift = np.zeros((2 * n_bus, len(unknown)))
    lift[unknown, np.arange(len(unknown))] = 1.0
    flow_map = np.hstack([flow_theta, flow_v]) @ lift
    v_rows = slice(n_pv + n_pq, n_pv + 2 * n_pq)

    rm = ResponseMatrices(
        av=du_alpha[v_rows], bv=du_zeta[v_rows],
        aq=-l_block @ du_alpha, bq=-l_block @ du_zeta,
        af=flow_map @ du_alpha, bf=flow_map @ du_zeta,
        h=h_block, n=n_block, m=m_block, l=l_block,
        partition=partition, gen_matrix=net.gen_incidence(),
        flow_theta=np.asarray(adm.b_line), flow_v=np.asarray(-adm.g_line),
        linearization=linearization,
        labels={
            'buses': [bus.bus_id for bus in net.buses],
            'pq': [net.buses[i].bus_id for i in partition.pq],
            'regulated': [net.buses[i].bus_id for i in partition.regulated],
            'branches': [f'{br.from_bus}-{br.to_bus}' for br in net.branches],
            'farms': [f'wind@{farm.bus}' for farm in net.wind_farms],
        },
    )
    LOGGER.debug(
        'Built %s response matrices for %d PQ buses, %d regulated buses, %d branches',
        linearization, n_pq, len(partition.regulated), net.n_branch,
    )
    return rm


def predict_response(
        rm: ResponseMatrices,
        strategy: 'OperatingStrategy',
        zeta: np.ndarray,
        flows: np.ndarray = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Predict the PQ voltages, the reactive outputs at R ∪ S and the line flows
    after the response to zeta: ṽ_L = (1ᵀζ)A^v α + B^v ζ + v_L and so on.

    Args:
        rm: Response matrices.
        strategy: The nominal operating strategy.
        zeta: Forecast error of every wind farm.
        flows: Nominal line flows to start from. Defaults to the linear flow
            map evaluated at the strategy's nominal state.
    """

    zeta = np.asarray(zeta, dtype=float)
    omega = float(zeta.sum()) if zeta.size else 0.0
    alpha_bus = rm.gen_matrix @ strategy.alpha
    q_bus = rm.gen_matrix @ strategy.qg
    if flows is None:
        flows = rm.nominal_flows(strategy.theta, strategy.v)

    v_pq = strategy.v[rm.partition.pq] + omega * (rm.av @ alpha_bus) + rm.bv @ zeta
    q_reg = q_bus[rm.partition.regulated] + omega * (rm.aq @ alpha_bus) + rm.bq @ zeta
    f_br = flows + omega * (rm.af @ alpha_bus) + rm.bf @ zeta
    return v_pq, q_reg, f_br


def dump_response(rm: ResponseMatrices, directory: str) -> None:
    """Write every response matrix to a CSV file in directory"""

    os.makedirs(directory, exist_ok=True)
    layout = {
        'av': ('pq', 'buses'), 'bv': ('pq', 'farms'),
        'aq': ('regulated', 'buses'), 'bq': ('regulated', 'farms'),
        'af': ('branches', 'buses'), 'bf': ('branches', 'farms'),
    }
    for name, (row_key, col_key) in layout.items():
        frame = pd.DataFrame(
            getattr(rm, name), index=rm.labels[row_key], columns=rm.labels[col_key],
        )
        frame.to_csv(os.path.join(directory, f'{name}.csv'))
    LOGGER.info('Wrote response matrices to %s', directory)
