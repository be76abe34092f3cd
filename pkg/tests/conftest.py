import numpy as np
import pytest

from vizrec.experiments import gen_uniform_dataset, planted_dataset
from vizrec.tables import FeatureKind, from_arrays


@pytest.fixture(scope="session")
def planted():
    return planted_dataset(seed=0)


@pytest.fixture(scope="session")
def uniform_small():
    return gen_uniform_dataset(n=5000, seed=0)


@pytest.fixture
def tiny_table():
    # hand-checkable 8-row table
    return from_arrays(
        "tiny",
        {
            "g": (FeatureKind.DISCRETE, np.array([1, 1, 2, 2, 1, 2, 1, 2])),
            "a": (FeatureKind.DISCRETE, np.array([1, 2, 3, 1, 2, 3, 1, 2])),
            "b": (FeatureKind.BINARY, np.array([0, 1, 0, 1, 0, 1, 0, 1])),
        },
    )
