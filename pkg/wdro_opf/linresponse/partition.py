"""
This module orders the buses for the incremental model: the reference bus R,
the PV buses S and the PQ buses L. State variables are stacked as
(θ_R, θ_S, θ_L) and (v_R, v_S, v_L).
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from wdro_opf.case_io import Network


@dataclass(frozen=True)
class Partition:
    """Bus positions of each class, in stacking order"""

    ref: List[int]
    pv: List[int]
    pq: List[int]
    n_bus: int

    @classmethod
    def from_network(cls, net: Network) -> 'Partition':
        """Take the partition straight from the network's bus classes"""

        return cls(ref=[net.ref], pv=list(net.pv), pq=list(net.pq), n_bus=net.n_bus)

    @property
    def regulated(self) -> List[int]:
        """The buses whose voltage AVR holds, R ∪ S"""

        return self.ref + self.pv

    @property
    def permutation(self) -> np.ndarray:
        """Bus positions in stacking order; a bijection on range(n_bus)"""

        return np.array(self.ref + self.pv + self.pq, dtype=int)

    def unknown_columns(self) -> np.ndarray:
        """Columns of (θ, v) solved for by the incremental model: θ_S, θ_L, v_L"""

        n = self.n_bus
        return np.array(self.pv + self.pq + [n + i for i in self.pq], dtype=int)

    def fixed_columns(self) -> np.ndarray:
        """Columns of (θ, v) held by the controls: θ_R, v_R, v_S"""

        n = self.n_bus
        return np.array(self.ref + [n + i for i in self.ref] + [n + i for i in self.pv], dtype=int)

    def balance_rows(self) -> np.ndarray:
        """Rows of (p, q) that the incremental model solves: p_S, p_L, q_L"""

        return self.unknown_columns()

    def regulated_q_rows(self) -> np.ndarray:
        """Rows of q at the reference and PV buses"""

        return np.array([self.n_bus + i for i in self.regulated], dtype=int)

    def describe(self) -> str:
        """A short summary for error messages"""

        return f'R={self.ref}, |S|={len(self.pv)}, |L|={len(self.pq)}'
