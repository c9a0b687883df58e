import numpy as np
import pytest

from fxcov.crosscov import cross_cov
from fxcov.fdata import BivariateSeries, FunctionalSeries, Grid
from fxcov.lrc import bartlett_weight


def random_pair(T, R, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    x = scale * np.cumsum(rng.standard_normal((T, R)), axis=1) / np.sqrt(R)
    y = 0.5 * x + np.cumsum(rng.standard_normal((T, R)), axis=1) / np.sqrt(R)
    return BivariateSeries(FunctionalSeries(Grid(R), x), FunctionalSeries(Grid(R), y))


@pytest.fixture
def pair():
    return random_pair(40, 12, seed=3)


@pytest.fixture
def scalar_pair():
    # T = 2, R = 1: X = (1, -1), Y = (2, -2)
    return BivariateSeries.from_arrays([[1.0], [-1.0]], [[2.0], [-2.0]])


def dense_lrc(b, h):
    """R^4 lag-window estimate built straight from the residual surfaces."""
    T, R = b.T, b.grid.R
    C = cross_cov(b).values
    xc, yc = b.x.centered(), b.y.centered()
    zeta = np.einsum("jt,js->jts", xc, yc) - C
    D = np.zeros((R, R, R, R))
    for lag in range(-(h - 1), h):
        w = bartlett_weight(lag / h)
        g = np.zeros((R, R, R, R))
        for m in range(T):
            if 0 <= m + lag < T:
                g += np.einsum("ts,uv->tsuv", zeta[m], zeta[m + lag])
        D += w * g / T
    return D
