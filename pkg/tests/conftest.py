import numpy as np
import pytest

from loghls.grids import make_radial_grid, make_sphere_grid

EULER_GAMMA = float(np.euler_gamma)


@pytest.fixture(scope="session")
def radial_fine():
    """Default planar working grid (matches the acceptance settings)."""
    return make_radial_grid(1e4, 4096)


@pytest.fixture(scope="session")
def radial_small():
    return make_radial_grid(1e4, 1024)


@pytest.fixture(scope="session")
def sphere_grid():
    return make_sphere_grid(128, 256)


@pytest.fixture(scope="session")
def sphere_small():
    return make_sphere_grid(64, 128)
