import numpy as np
import pytest

from ridgeflow.grid import ProductGrid, make_periodic_grid
from ridgeflow.tt import FttTensor


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid2d():
    return ProductGrid.cube(-10.0, 10.0, 64, 2)


@pytest.fixture
def grid3d():
    return ProductGrid.cube(-8.0, 8.0, 48, 3)


def weighted_norm_full(values, grid):
    """Oracle: discrete weighted L2 norm of a dense array."""
    w = np.ones(())
    out = values**2
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = grid.axes[ax].n
        out = out * grid.axes[ax].weights.reshape(shape)
    return float(np.sqrt(out.sum()))


def weighted_dot_full(a, b, grid):
    """Oracle: discrete weighted L2 inner product of dense arrays."""
    out = a * b
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = grid.axes[ax].n
        out = out * grid.axes[ax].weights.reshape(shape)
    return float(out.sum())


def smooth_random_tensor(grid, interior_ranks, rng, decay=3.0):
    """Random low-rank tensor with smooth (band-limited) univariate factors.

    Smoothness keeps spectral differentiation meaningful in tests that
    need derivatives; plain white-noise cores are fine elsewhere.
    """
    d = grid.d
    ranks = [1] + list(interior_ranks) + [1]
    cores = []
    for i in range(d):
        g = grid.axes[i]
        n = g.n
        nmodes = max(3, n // 8)
        base = np.zeros((ranks[i], n, ranks[i + 1]))
        theta = 2 * np.pi * (g.nodes - g.a) / g.length
        for a in range(ranks[i]):
            for b in range(ranks[i + 1]):
                coefs = rng.standard_normal(nmodes) * np.exp(-decay * np.arange(nmodes) / nmodes)
                phases = rng.uniform(0, 2 * np.pi, nmodes)
                vals = np.zeros(n)
                for m in range(nmodes):
                    vals += coefs[m] * np.cos(m * theta + phases[m])
                base[a, :, b] = vals
        cores.append(base)
    return FttTensor(grid, cores)
