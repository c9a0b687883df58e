"""Marginal functional PCA of a single series.

The retained eigenfunctions of each series, taken pairwise as products
``theta_X,i (t) * theta_Y,k (s)``, form the orthonormal basis on which the
long-run covariance is estimated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from fxcov.errors import DegenerateError, FxcovError
from fxcov.fdata import FunctionalSeries, Grid

EIG_TOL = 1e-10
GAP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FpcBasis:
    """Functional principal components of one series.

    Attributes
    ----------
    grid : Grid
    eigenvalues : ndarray, shape (R,)
        Operator eigenvalues (matrix eigenvalues divided by ``R``), sorted
        nonincreasing, small negatives clipped to zero.
    eigenfunctions : ndarray, shape (R, R)
        Row ``a`` holds ``theta_a(t_j)``; rows are orthonormal under the
        ``1 / R`` quadrature.
    q : int
        Number of retained components.
    variance_explained : float
        Cumulative fraction of the total variance carried by the first ``q``.
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    q: int
    variance_explained: float

    @property
    def functions(self) -> np.ndarray:
        """The retained eigenfunctions, shape ``(q, R)``."""
        return self.eigenfunctions[: self.q]

    def scores(self, s: FunctionalSeries) -> np.ndarray:
        """``<X_i - mean, theta_a>`` for every row ``i`` and retained ``a``."""
        return s.centered() @ self.functions.T / self.grid.R

    def truncate(self, q: int) -> "FpcBasis":
        if not 1 <= q <= self.grid.R:
            raise FxcovError(f"q must lie in [1, {self.grid.R}], got {q}")
        total = self.eigenvalues.sum()
        return FpcBasis(
            self.grid,
            self.eigenvalues,
            self.eigenfunctions,
            q,
            float(self.eigenvalues[:q].sum() / total),
        )


def sample_cov_matrix(s: FunctionalSeries) -> np.ndarray:
    """``R x R`` covariance of the discretized curves with ``1 / T`` scaling."""
    if s.T < 2:
        raise FxcovError("covariance needs T >= 2")
    xc = s.centered()
    return xc.T @ xc / s.T


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # columns: make the largest-magnitude coordinate positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def fpc_basis(
    s: FunctionalSeries,
    v: float = 0.90,
    q_max: int | None = 10,
    q: int | None = None,
) -> FpcBasis:
    """Eigendecomposition of the sample covariance operator of ``s``.

    ``q`` defaults to the smallest count whose cumulative share of the total
    variance reaches ``v``, capped by ``q_max`` and by the numerical rank of
    the covariance.  Passing ``q`` explicitly skips the threshold rule.
    """
    if not 0.0 < v < 1.0:
        raise FxcovError(f"variance threshold must lie in (0, 1), got {v!r}")
    c = sample_cov_matrix(s)
    R = s.grid.R
    if not np.any(c):
        raise DegenerateError("degenerate series: sample covariance is identically zero")

    vals, vecs = np.linalg.eigh(c)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    vals = vals / R
    scale = vals[0]
    vals = np.where(vals < 0, 0.0, vals)
    funcs = _fix_signs(vecs).T * np.sqrt(R)

    total = vals.sum()
    share = np.cumsum(vals) / total
    rank = int(np.count_nonzero(vals > EIG_TOL * scale))
    if q is None:
        q = int(np.searchsorted(share, v, side="left")) + 1
        q = min(q, rank)
        if q_max is not None:
            q = min(q, q_max)
    elif not 1 <= q <= R:
        raise FxcovError(f"q must lie in [1, {R}], got {q}")

    gaps = -np.diff(vals[: q + 1]) if q < R else -np.diff(vals[:q])
    if gaps.size and np.min(gaps) < GAP_TOL * scale:
        warnings.warn(
            "near-tied fPC eigenvalues; retained eigenfunctions are not well identified",
            RuntimeWarning,
            stacklevel=2,
        )
    return FpcBasis(s.grid, vals, funcs, int(q), float(share[q - 1]))
