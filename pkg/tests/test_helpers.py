import numpy as np

from conftest import adjusted_rand, two_partitions


def test_adjusted_rand_reference_values():
    assert adjusted_rand([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    # textbook example: ARI of these two labelings is 0.24242424...
    assert abs(adjusted_rand([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 2, 2]) - 0.24242424242424243) < 1e-12


def test_two_partitions_covers_every_split():
    # 2^(n-1) - 1 unordered splits
    for n in range(2, 8):
        seen = {tuple(1 - p if p[0] else p) for p in two_partitions(n)}
        assert len(seen) == 2 ** (n - 1) - 1
