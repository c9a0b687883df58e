import numpy as np
import pytest
from scipy import stats as sps

from fxcov.crosscov import cross_cov
from fxcov.dgp import (
    DgpSpec,
    far1_kernel,
    monte_carlo_seed,
    replication_seed,
    run_power_curve,
    run_size_study,
    sim_brownian_motion,
    sim_far1,
    sim_pair,
)
from fxcov.errors import FxcovError
from fxcov.fdata import Grid, norm_2d
from fxcov.pipeline import Settings

FAST = Settings.simulation(R=20, n_reps=200, bridge_grid=100)


def test_spec_validation():
    with pytest.raises(FxcovError):
        DgpSpec("garch")
    with pytest.raises(FxcovError):
        DgpSpec(alpha=1.5)
    with pytest.raises(FxcovError):
        DgpSpec(burn_in=-1)


def test_brownian_motion_moments():
    g = Grid(10)
    W = sim_brownian_motion(g, np.random.default_rng(0), size=100_000)
    assert np.var(W[:, -1]) == pytest.approx(1.0, abs=0.02)
    assert np.mean(W[:, 2] * W[:, 6]) == pytest.approx(0.3, abs=0.02)
    a = sim_brownian_motion(g, np.random.default_rng(5))
    b = sim_brownian_motion(g, np.random.default_rng(5))
    assert np.array_equal(a, b) and a.shape == (10,)


def test_pair_determinism():
    spec = DgpSpec("far1", 0.3, 50, 20, 10, seed=42)
    a, b = sim_pair(spec), sim_pair(spec)
    assert np.array_equal(a.x.values, b.x.values) and np.array_equal(a.y.values, b.y.values)
    assert a.T == 50 and a.grid.R == 20


def test_alpha_one_gives_identical_series():
    for kind in ("iid", "far1"):
        b = sim_pair(DgpSpec(kind, 1.0, 30, 15, 5, seed=1))
        assert np.array_equal(b.x.values, b.y.values)


def test_alpha_zero_small_cross_covariance():
    norms = [norm_2d(cross_cov(sim_pair(DgpSpec("iid", 0.0, 1000, 50, 0, seed=s)))) for s in range(40)]
    assert np.mean(np.array(norms) <= 0.1) >= 0.95


def test_far1_kernel_norm():
    R = 400
    K = far1_kernel(Grid(R))
    # the quadrature matrix carries the 1/R weight; the kernel itself is R * K
    hs = np.sqrt(np.sum((R * K) ** 2) / R**2)
    assert hs == pytest.approx(1 / np.sqrt(6), abs=2e-3)
    assert hs < 1


def test_far1_positive_lag_one_dependence():
    g = Grid(30)
    eps = sim_far1(g, np.random.default_rng(3), 2000, burn_in=100)
    ip = np.sum(eps[:-1] * eps[1:], axis=1) / g.R
    assert ip.mean() > 0
    norms = np.sum(eps**2, axis=1)
    assert np.corrcoef(norms[:-1], norms[1:])[0, 1] > 0


def test_iid_cross_covariance_structure():
    b = sim_pair(DgpSpec("iid", 0.5, 2000, 50, 0, seed=4))
    t = b.grid.points
    np.testing.assert_allclose(cross_cov(b).values, 0.25 * np.minimum.outer(t, t), atol=0.05)


def test_far1_stationarity_after_burn_in():
    g = Grid(30)
    eps = sim_far1(g, np.random.default_rng(5), 50, burn_in=100, size=4000)
    first = np.sqrt(np.sum(eps[:, 0] ** 2, axis=1) / g.R)
    last = np.sqrt(np.sum(eps[:, -1] ** 2, axis=1) / g.R)
    assert sps.ks_2samp(first, last).statistic <= 0.05


def test_stream_independence():
    b = sim_pair(DgpSpec("far1", 0.0, 2000, 30, 100, seed=6))
    assert norm_2d(cross_cov(b)) < 0.05


def test_replication_seeds():
    a = replication_seed(0, "iid", 300, 0)
    assert a == replication_seed(0, "iid", 300, 0)
    assert len({a, replication_seed(0, "far1", 300, 0), replication_seed(0, "iid", 1000, 0),
                replication_seed(0, "iid", 300, 1), replication_seed(1, "iid", 300, 0)}) == 5
    assert monte_carlo_seed(0) != monte_carlo_seed(1)


def test_single_simulation_rates():
    rows = run_size_study((40,), ("iid",), statistics=("F", "Fp", "Z", "Zp"), n_sims=1, settings=FAST)
    assert len(rows) == 12
    assert all(r.rate in (0.0, 1.0) for r in rows)


def test_power_curve_alpha_zero_matches_size_study():
    size = run_size_study((40,), ("far1",), levels=(0.05,), n_sims=6, seed=3, settings=FAST)
    power = run_power_curve("far1", 40, alphas=(0.0, 0.9), n_sims=6, seed=3, settings=FAST)
    zero = [(r.statistic, r.rate) for r in power if r.alpha == 0.0]
    assert zero == [(r.statistic, r.rate) for r in size]
    strong = {r.statistic: r.rate for r in power if r.alpha == 0.9}
    assert strong == {"F": 1.0, "Fp": 1.0}
