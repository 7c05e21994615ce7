import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from orthofit import DataSplit, NormalizedDataset
from orthofit.synth import SplitMix64


def all_train_split(n):
    """Every point in the training group; cv/test empty."""
    return DataSplit(train_idx=np.arange(n), cv_idx=np.array([], dtype=int),
                     test_idx=np.array([], dtype=int))


def unit_dataset(points):
    return NormalizedDataset.from_unit_points(points)


def uniform_xy(n, seed):
    rng = SplitMix64(seed)
    x = np.array([rng.uniform() for _ in range(n)])
    y = np.array([rng.uniform() for _ in range(n)])
    return x, y


@pytest.fixture
def plane_points():
    pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0),
           (0.5, 0.25), (0.25, 0.75), (0.8, 0.4), (0.3, 0.9)]
    return [(x, y, 0.5 + 0.25 * x - 0.1 * y) for x, y in pts]
