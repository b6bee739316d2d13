import numpy as np
import pytest

from multising import BinaryDataset, CanonicalParams, GroupedData, pair_count


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_params(p, rng, scale=1.0):
    return CanonicalParams(
        main=rng.normal(0.0, scale, size=p),
        inter=rng.normal(0.0, scale, size=pair_count(p)),
    )


def make_dataset(p, n, rng, label="g1"):
    return BinaryDataset(rng.integers(0, 2, size=(n, p)), label)


def make_grouped(p, n, q, rng):
    return GroupedData(
        [make_dataset(p, n, rng, label=f"g{x + 1}") for x in range(q)]
    )
