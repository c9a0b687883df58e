"""Synthetic bivariate functional series and the size/power harness.

Pairs are built from three mutually independent innovation streams,

    X_i = alpha * eps_c,i + (1 - alpha) * eps_x,i
    Y_i = alpha * eps_c,i + (1 - alpha) * eps_y,i,

so ``alpha`` controls the cross-covariance (zero at ``alpha = 0``).  The
innovations are either iid Brownian motions or FAR(1) processes with kernel
``min(t, s)`` driven by Brownian motions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from fxcov.errors import FxcovError
from fxcov.fdata import BivariateSeries, FunctionalSeries, Grid

KINDS = ("iid", "far1")


@dataclass(frozen=True)
class DgpSpec:
    kind: str = "iid"
    alpha: float = 0.0
    T: int = 300
    R: int = 100
    burn_in: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FxcovError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise FxcovError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.burn_in < 0:
            raise FxcovError("burn_in must be nonnegative")
        if self.T < 2 or self.R < 1:
            raise FxcovError("need T >= 2 and R >= 1")


def sim_brownian_motion(grid: Grid, rng: np.random.Generator, size=None) -> np.ndarray:
    """Standard Brownian motion at ``t_j = j / R``; ``size`` prepends batch axes."""
    shape = (grid.R,) if size is None else tuple(np.atleast_1d(size)) + (grid.R,)
    z = rng.standard_normal(shape)
    return np.cumsum(z, axis=-1) / np.sqrt(grid.R)


def far1_kernel(grid: Grid) -> np.ndarray:
    """Quadrature matrix of ``f -> int min(t, s) f(s) ds`` on the grid."""
    t = grid.points
    return np.minimum.outer(t, t) / grid.R


def sim_far1(
    grid: Grid, rng: np.random.Generator, n: int, burn_in: int = 100, size=()
) -> np.ndarray:
    """FAR(1) paths ``eps_i = int min(t, s) eps_{i-1}(s) ds + W_i``, started at zero.

    Returns shape ``size + (n, R)`` after discarding ``burn_in`` iterates.
    """
    size = tuple(np.atleast_1d(size)) if size != () else ()
    W = sim_brownian_motion(grid, rng, size=size + (burn_in + n,))
    K = far1_kernel(grid)
    eps = np.empty_like(W)
    prev = np.zeros(size + (grid.R,))
    for i in range(burn_in + n):
        prev = prev @ K.T + W[..., i, :]
        eps[..., i, :] = prev
    return eps[..., burn_in:, :]


def _innovations(spec: DgpSpec, grid: Grid, rng: np.random.Generator) -> np.ndarray:
    """Three independent streams, shape ``(3, T, R)``: common, x-only, y-only."""
    if spec.kind == "iid":
        return sim_brownian_motion(grid, rng, size=(3, spec.T))
    return sim_far1(grid, rng, spec.T, spec.burn_in, size=(3,))


def sim_pair(spec: DgpSpec) -> BivariateSeries:
    grid = Grid(spec.R)
    rng = np.random.Generator(np.random.Philox(spec.seed))
    ec, ex, ey = _innovations(spec, grid, rng)
    a = spec.alpha
    x = a * ec + (1.0 - a) * ex
    y = a * ec + (1.0 - a) * ey
    return BivariateSeries(FunctionalSeries(grid, x), FunctionalSeries(grid, y))


def replication_seed(seed: int, kind: str, T: int, rep: int) -> int:
    """Dataset seed for replication ``rep``; independent of alpha so that
    different alphas reuse the same innovations."""
    ss = np.random.SeedSequence([seed, KINDS.index(kind), T, rep])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def monte_carlo_seed(seed: int) -> int:
    """Seed shared by the null-law simulations of every replication."""
    return int(np.random.SeedSequence([seed, 0xC0FFEE]).generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# size and power studies


@dataclass(frozen=True)
class RateRow:
    statistic: str
    T: int
    kind: str
    alpha: float
    level: float
    rate: float
    n_sims: int


def _study_pvalues(
    kind: str,
    T: int,
    alpha: float,
    statistics: Sequence[str],
    n_sims: int,
    seed: int,
    settings,
) -> dict[str, np.ndarray]:
    from fxcov.pipeline import batch_pvalues, evaluate_statistics

    records = []
    for rep in range(n_sims):
        spec = DgpSpec(kind, alpha, T, settings.R, settings.burn_in, replication_seed(seed, kind, T, rep))
        records.append(evaluate_statistics(sim_pair(spec), statistics, settings))
    return batch_pvalues(records, statistics, settings, monte_carlo_seed(seed))


def run_size_study(
    Ts: Iterable[int] = (300,),
    kinds: Iterable[str] = KINDS,
    alphas: Iterable[float] = (0.0,),
    levels: Sequence[float] = (0.10, 0.05, 0.01),
    statistics: Sequence[str] = ("F", "Fp"),
    n_sims: int = 1000,
    seed: int = 0,
    settings=None,
) -> list[RateRow]:
    """Empirical rejection rates of each statistic at each nominal level.

    A test rejects when its p-value is at most the level.  ``settings`` is a
    :class:`fxcov.pipeline.Settings`; its defaults follow the simulation
    design (R = 100, q = 3, p = 3).
    """
    from fxcov.pipeline import Settings

    settings = Settings.simulation() if settings is None else settings
    rows = []
    for kind in kinds:
        for T in Ts:
            for alpha in alphas:
                pv = _study_pvalues(kind, T, alpha, statistics, n_sims, seed, settings)
                for name in statistics:
                    for level in levels:
                        rate = float(np.mean(pv[name] <= level))
                        rows.append(RateRow(name, T, kind, float(alpha), float(level), rate, n_sims))
    return rows


def run_power_curve(
    kind: str = "far1",
    T: int = 300,
    alphas: Sequence[float] = tuple(np.round(np.arange(0.0, 0.81, 0.1), 1)),
    level: float = 0.05,
    statistics: Sequence[str] = ("F", "Fp"),
    n_sims: int = 1000,
    seed: int = 0,
    settings=None,
) -> list[RateRow]:
    """Rejection rate of ``C_XY = 0`` as ``alpha`` grows.  Uses the same
    replication seeds as :func:`run_size_study`, so the ``alpha = 0`` row
    reproduces the size study."""
    return run_size_study(
        Ts=(T,),
        kinds=(kind,),
        alphas=alphas,
        levels=(level,),
        statistics=statistics,
        n_sims=n_sims,
        seed=seed,
        settings=settings,
    )
