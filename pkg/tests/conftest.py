"""
Shared fixtures: small grids and solved profiles reused across test modules.
"""

import numpy as np
import pytest

from chemotaxis_waves.grid_kernel import Field, UniformGrid, default_grid
from chemotaxis_waves.slab_solver import WaveParams, solve_slab


@pytest.fixture
def line_grid():
    """[-10, 10] with dx = 0.01 and a node at the origin."""
    return UniformGrid(-10.0, 0.01, 2001)


@pytest.fixture
def tanh_front(line_grid):
    return Field(line_grid, 0.5 * (1.0 - np.tanh(line_grid.x)))


@pytest.fixture(scope='session')
def slab_params():
    return WaveParams(chi=-4.0, nu=1.0, c=0.4, L=30.0)


@pytest.fixture(scope='session')
def slab_solution(slab_params):
    return solve_slab(slab_params, grid=default_grid(slab_params.L, slab_params.nu,
                                                     slab_params.chi))


@pytest.fixture
def sharp_grid():
    """[-12, 12] with dx = 1e-3, wide enough for the standard test functions."""
    return UniformGrid(-12.0, 1e-3, 24001)
