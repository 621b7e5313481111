import numpy as np
import pytest

from schrolab.grid import DataFunction, Grid, PotentialSpec


# A shorter window on the same box keeps the scattering tests quick while the
# extraction window (zeta_max = L / 2 t1) stays the same as the default grid.
@pytest.fixture(scope="session")
def small_grid():
    return Grid(n=1, L=224.0, N=1024, t0=-15.0, t1=15.0, M=1500)


@pytest.fixture(scope="session")
def tiny_grid():
    return Grid(n=1, L=40.0, N=256, t0=-4.0, t1=4.0, M=160)


@pytest.fixture(scope="session")
def potential():
    return PotentialSpec(amplitude=0.5, widths=(3.0, 3.0))


@pytest.fixture(scope="session")
def gaussian(small_grid):
    return DataFunction.from_callable(lambda x: np.exp(-x**2 / 2), small_grid.frequency_grid())
