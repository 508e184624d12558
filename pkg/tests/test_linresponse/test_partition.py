"""
A test module for the wdro_opf.linresponse.partition module
"""

import numpy as np

from wdro_opf.linresponse import Partition


def test_partition_of_case(ieee14_wind):
    """Verify the bus classes and the row and column selections"""

    partition = Partition.from_network(ieee14_wind)
    assert partition.regulated == [0, 1, 2, 5, 7]
    assert sorted(partition.permutation.tolist()) == list(range(14))
    unknown = partition.unknown_columns()
    fixed = partition.fixed_columns()
    assert len(unknown) == 13 + 9
    assert len(fixed) == 1 + 5
    assert not set(unknown) & set(fixed)
    assert len(set(unknown) | set(fixed)) == 28
    assert np.array_equal(partition.balance_rows(), unknown)
    assert partition.regulated_q_rows().tolist() == [14, 15, 16, 19, 21]
    assert partition.describe() == 'R=[0], |S|=4, |L|=9'
