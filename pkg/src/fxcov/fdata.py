"""Grids, functional series containers and discretized inner products.

Curves are represented only by their values on a shared grid
``t_j = j / R`` (``j = 1..R``).  Integrals over ``[0, 1]`` are right-endpoint
Riemann sums with weight ``1 / R`` per point, so the constant function
integrates to exactly one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fxcov.errors import ConformabilityError, FxcovError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """``R`` equally spaced points ``j / R`` on ``(0, 1]``."""

    R: int

    def __post_init__(self):
        if int(self.R) != self.R or self.R < 1:
            raise FxcovError(f"grid size must be a positive integer, got {self.R!r}")

    @property
    def points(self) -> np.ndarray:
        return np.arange(1, self.R + 1) / self.R

    @property
    def weight(self) -> float:
        return 1.0 / self.R


@dataclass(frozen=True, eq=False)
class FunctionalSeries:
    """``T`` curves observed on a common grid; ``values[i, j] = X_i(t_j)``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != self.grid.R:
            raise ConformabilityError(
                f"values must have shape (T, {self.grid.R}), got {values.shape}"
            )
        if values.shape[0] < 1:
            raise FxcovError("a functional series needs at least one curve")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            i, j = bad[0]
            raise FxcovError(f"non-finite value at row {i}, column {j}")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def from_array(cls, values) -> "FunctionalSeries":
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ConformabilityError("expected a 2-d array of shape (T, R)")
        return cls(Grid(values.shape[1]), values)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    def centered(self) -> np.ndarray:
        """Rows minus the full-sample mean curve."""
        return self.values - mean_curve(self)


@dataclass(frozen=True, eq=False)
class BivariateSeries:
    """Two series on one grid, already aligned at ``lag``.

    Row ``i`` of ``x`` is paired with row ``i`` of ``y``; for ``lag > 0`` the
    pairing was produced by :func:`apply_lag`.
    """

    x: FunctionalSeries
    y: FunctionalSeries
    lag: int = 0

    def __post_init__(self):
        if self.x.grid != self.y.grid:
            raise ConformabilityError(
                f"grids differ: R = {self.x.grid.R} vs R = {self.y.grid.R}"
            )
        if self.x.T != self.y.T:
            raise ConformabilityError(
                f"sample lengths differ: T = {self.x.T} vs T = {self.y.T}"
            )
        if self.lag < 0:
            raise FxcovError("lag must be nonnegative")

    @classmethod
    def from_arrays(cls, x, y, lag: int = 0) -> "BivariateSeries":
        return cls(FunctionalSeries.from_array(x), FunctionalSeries.from_array(y), lag)

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @property
    def T(self) -> int:
        return self.x.T


@dataclass(frozen=True, eq=False)
class Surface:
    """A function on ``[0, 1]^2`` stored as ``values[j, k] = F(t_j, s_k)``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        R = self.grid.R
        if values.shape != (R, R):
            raise ConformabilityError(f"surface must be {R} x {R}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise FxcovError("surface contains non-finite values")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def zeros(cls, grid: Grid) -> "Surface":
        return cls(grid, np.zeros((grid.R, grid.R)))

    def __add__(self, other: "Surface") -> "Surface":
        _check_same_grid(self.grid, other.grid)
        return Surface(self.grid, self.values + other.values)

    def __sub__(self, other: "Surface") -> "Surface":
        _check_same_grid(self.grid, other.grid)
        return Surface(self.grid, self.values - other.values)


def _check_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ConformabilityError(f"grid mismatch: R = {a.R} vs R = {b.R}")


def inner_product_1d(f, g, grid: Grid) -> float:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (grid.R,) or g.shape != (grid.R,):
        raise ConformabilityError(
            f"vectors must have length {grid.R}, got {f.shape} and {g.shape}"
        )
    return float(f @ g) / grid.R


def inner_product_2d(F: Surface, G: Surface) -> float:
    _check_same_grid(F.grid, G.grid)
    return float(np.vdot(F.values, G.values)) / F.grid.R**2


def norm_2d(F: Surface) -> float:
    return float(np.sqrt(inner_product_2d(F, F)))


def mean_curve(s: FunctionalSeries) -> np.ndarray:
    return s.values.mean(axis=0)


def cidr_transform(prices: FunctionalSeries) -> FunctionalSeries:
    """Cumulative intraday returns ``100 * (log P_i(t_j) - log P_i(t_1))``.

    Raises
    ------
    FxcovError
        If any price is not strictly positive; the message names the first
        offending (row, column) pair, zero-based.
    """
    P = prices.values
    bad = np.argwhere(P <= 0)
    if bad.size:
        i, j = bad[0]
        raise FxcovError(f"nonpositive price {P[i, j]!r} at row {i}, column {j}")
    logp = np.log(P)
    return FunctionalSeries(prices.grid, 100.0 * (logp - logp[:, :1]))


def apply_lag(x: FunctionalSeries, y: FunctionalSeries, lag: int) -> BivariateSeries:
    """Pair ``X_{lag+1+i}`` with ``Y_{1+i}``, leaving ``T - lag`` pairs."""
    if int(lag) != lag or lag < 0:
        raise FxcovError(f"lag must be a nonnegative integer, got {lag!r}")
    if x.T != y.T:
        raise ConformabilityError(f"sample lengths differ: {x.T} vs {y.T}")
    T = x.T
    if lag >= T - 1:
        raise FxcovError(f"lag {lag} leaves fewer than two pairs (T = {T})")
    if lag == 0:
        return BivariateSeries(x, y, 0)
    return BivariateSeries(
        FunctionalSeries(x.grid, x.values[lag:]),
        FunctionalSeries(y.grid, y.values[: T - lag]),
        lag,
    )
