import numpy as np
import pytest

from favlab.ifs import four_corner, generate_generation, preset
from favlab.projections import AngleGrid


@pytest.fixture(scope="session")
def fourcorner():
    return preset("fourcorner")


@pytest.fixture(scope="session")
def gens(fourcorner):
    """Stage-n square lists for the unit 4-corner system, cached per session."""
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = generate_generation(fourcorner, n)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def grid256():
    return AngleGrid(256)


@pytest.fixture(scope="session")
def grid4096():
    return AngleGrid(4096)


@pytest.fixture(scope="session")
def segment_cloud():
    """256 evenly spaced points on the horizontal unit segment."""
    from favlab.visibility import PointCloud
    m = 256
    xs = (np.arange(m) + 0.5) / m
    return PointCloud(np.stack([xs, np.zeros(m)], axis=1), 1.0 / m)


def wide_system():
    return preset("fourcorner-wide")


def annulus_system():
    return preset("fourcorner-annulus")
