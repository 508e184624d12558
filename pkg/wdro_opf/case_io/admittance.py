"""
This module assembles the bus admittance matrix Y = G + jB from the π-model of
each branch, along with the pieces the linear models need: the susceptance
matrix without shunt elements (B′) and the line matrices G^l and B^l that map
bus voltages and angles to branch flows.

Off-nominal tap ratios are folded into the π-model the same way MATPOWER does.
A branch that is out of service contributes nothing to any matrix.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy import sparse

from wdro_opf.case_io.network import Network


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


@dataclass(frozen=True, eq=False)
class AdmittanceSet:  # pylint: disable=too-many-instance-attributes
    """Everything derived from the network's admittances.

    Attributes:
        ybus: The complex bus admittance matrix (sparse).
        yf: Maps bus voltages to complex currents injected at the from end of
            every branch (sparse, n_branch x n_bus).
        yt: The same for the to end.
        g: Real part of ybus (dense).
        b: Imaginary part of ybus (dense).
        b_prime: B with the shunts and the line charging left out (dense).
        g_line: Row k holds G_ij at the from bus and -G_ij at the to bus.
        b_line: Row k holds B_ij at the from bus and -B_ij at the to bus.
        cf: Branch-to-from-bus incidence (sparse).
        ct: Branch-to-to-bus incidence (sparse).
    """

    ybus: sparse.csr_matrix
    yf: sparse.csr_matrix
    yt: sparse.csr_matrix
    g: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    g_line: np.ndarray
    b_line: np.ndarray
    cf: sparse.csr_matrix
    ct: sparse.csr_matrix

    def flow_map(self, theta: np.ndarray, v: np.ndarray) -> np.ndarray:
        """The linear from-to active flow of every branch, B^l θ − G^l v"""

        return self.b_line @ theta - self.g_line @ v


def build_admittance(net: Network) -> AdmittanceSet:  # pylint: disable=too-many-locals
    """Assemble the admittance structures of a network.

    Args:
        net: A validated network.
    """

    n_bus = net.n_bus
    n_branch = net.n_branch
    status = np.array([1.0 if br.in_service else 0.0 for br in net.branches])
    r = net.array('branches', 'r')
    x = net.array('branches', 'x')
    charging = net.array('branches', 'b')
    tap = net.array('branches', 'ratio')

    with np.errstate(divide='ignore', invalid='ignore'):
        series = np.where(status > 0, status / (r + 1j * x), 0.0)
    ytt = series + 1j * status * charging / 2
    yff = ytt / (tap * tap)
    yft = -series / tap
    ytf = -series / tap

    from_pos = np.array([net.bus_index[br.from_bus] for br in net.branches], dtype=int)
    to_pos = np.array([net.bus_index[br.to_bus] for br in net.branches], dtype=int)
    rows = np.arange(n_branch)
    cf = sparse.csr_matrix((np.ones(n_branch), (rows, from_pos)), shape=(n_branch, n_bus))
    ct = sparse.csr_matrix((np.ones(n_branch), (rows, to_pos)), shape=(n_branch, n_bus))

    yf = sparse.csr_matrix(
        (np.concatenate([yff, yft]), (np.concatenate([rows, rows]), np.concatenate([from_pos, to_pos]))),
        shape=(n_branch, n_bus),
    )
    yt = sparse.csr_matrix(
        (np.concatenate([ytf, ytt]), (np.concatenate([rows, rows]), np.concatenate([from_pos, to_pos]))),
        shape=(n_branch, n_bus),
    )
    shunt = (net.array('buses', 'g_shunt') + 1j * net.array('buses', 'b_shunt'))
    ybus = (cf.T @ yf + ct.T @ yt + sparse.diags(shunt)).tocsr()

    dense = ybus.toarray()
    g = dense.real.copy()
    b = dense.imag.copy()

    off_diagonal = b - np.diag(np.diag(b))
    b_prime = off_diagonal - np.diag(off_diagonal.sum(axis=1))

    g_line = np.zeros((n_branch, n_bus))
    b_line = np.zeros((n_branch, n_bus))
    g_line[rows, from_pos] = yft.real
    g_line[rows, to_pos] = -yft.real
    b_line[rows, from_pos] = yft.imag
    b_line[rows, to_pos] = -yft.imag

    LOGGER.debug('Built admittance for %d buses and %d branches', n_bus, n_branch)
    return AdmittanceSet(
        ybus=ybus, yf=yf, yt=yt, g=g, b=b, b_prime=b_prime,
        g_line=g_line, b_line=b_line, cf=cf, ct=ct,
    )
