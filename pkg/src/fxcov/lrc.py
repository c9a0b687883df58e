"""Long-run covariance of the product series and its spectrum.

The estimator is a lag-window (smoothed periodogram) sum of the
autocovariances of the residual surfaces

    zeta_j(t, s) = (X_j(t) - Xbar(t)) (Y_j(s) - Ybar(s)) - C_hat(t, s),

but it is never formed on the ``R^4`` grid.  Projection onto the product
basis commutes with the lag sum, so each ``zeta_j`` is first reduced to its
``q x q`` coefficient array and the lag sum runs on those.  The dense
construction is kept in the test-suite as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fxcov.errors import ConformabilityError, FxcovError
from fxcov.fdata import BivariateSeries, Surface
from fxcov.fpca import FpcBasis, fpc_basis

NEG_TOL = 1e-10


def bartlett_weight(u):
    """Triangular lag window ``(1 - |u|) * 1(|u| < 1)``."""
    u = np.abs(np.asarray(u, dtype=float))
    w = np.where(u < 1.0, 1.0 - u, 0.0)
    return float(w) if w.ndim == 0 else w


WEIGHTS: dict[str, Callable] = {"bartlett": bartlett_weight}


def default_bandwidth(T: int) -> int:
    """Smallest integer ``h`` with ``h**5 >= T``, i.e. ``ceil(T ** (1/5))``."""
    if T < 1:
        raise FxcovError("sample length must be positive")
    h = max(1, math.ceil(T**0.2) - 1)
    while h**5 < T:
        h += 1
    return h


@dataclass(frozen=True)
class LrcConfig:
    h: int
    weight: str | Callable = "bartlett"
    q: int | None = None

    def __post_init__(self):
        if self.h < 1:
            raise FxcovError(f"bandwidth must be >= 1, got {self.h}")
        if self.q is not None and self.q < 1:
            raise FxcovError(f"q must be >= 1, got {self.q}")
        if isinstance(self.weight, str) and self.weight not in WEIGHTS:
            raise FxcovError(f"unknown weight function {self.weight!r}")

    def weight_fn(self) -> Callable:
        return WEIGHTS[self.weight] if isinstance(self.weight, str) else self.weight


@dataclass(frozen=True, eq=False)
class CoeffSeries:
    """Projected residual surfaces ``values[j, i, k] = <zeta_j, theta_X,i (x) theta_Y,k>``.

    ``scores_x`` and ``scores_y`` are the fPC scores of the centered curves;
    ``values[j]`` is their outer product minus its mean over ``j``.
    """

    values: np.ndarray
    scores_x: np.ndarray
    scores_y: np.ndarray

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> tuple[int, int]:
        return self.values.shape[1], self.values.shape[2]


def coeff_series(b: BivariateSeries, bx: FpcBasis, by: FpcBasis) -> CoeffSeries:
    if bx.grid != b.grid or by.grid != b.grid:
        raise ConformabilityError("fPC bases were built on a different grid")
    sx = bx.scores(b.x)
    sy = by.scores(b.y)
    prod = sx[:, :, None] * sy[:, None, :]
    # the mean over j of prod is exactly the projection of C_hat(., ., 1)
    return CoeffSeries(prod - prod.mean(axis=0), sx, sy)


def lrc_tensor(cs: CoeffSeries, cfg: LrcConfig) -> np.ndarray:
    """Lag-window estimate of the long-run covariance in the product basis.

    Returns the ``q1 x q2 x q1 x q2`` tensor ``M`` with
    ``M[i, j, k, r] = sum_{|l| < h} W(l / h) gamma_l[i, j, k, r]``, where
    ``gamma_l`` is the lag-``l`` autocovariance of the coefficient arrays,
    symmetrized so that ``M[i, j, k, r] == M[k, r, i, j]`` exactly.
    """
    T = cs.T
    if cfg.h >= T:
        raise FxcovError(f"bandwidth h = {cfg.h} must be smaller than T = {T}")
    q1, q2 = cs.q
    B = cs.values.reshape(T, q1 * q2)
    W = cfg.weight_fn()
    M = B.T @ B / T * W(0.0)
    for lag in range(1, cfg.h):
        w = W(lag / cfg.h)
        if w == 0.0:
            continue
        g = B[: T - lag].T @ B[lag:] / T
        M = M + w * (g + g.T)
    M = 0.5 * (M + M.T)
    return M.reshape(q1, q2, q1, q2)


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Eigen-decomposition of the projected long-run covariance operator.

    ``eigen_arrays[i]`` is the coefficient array of the ``i``-th eigenfunction
    in the product basis (zero-based).  ``raw_eigenvalues`` keeps the values
    before negatives were clipped; ``clipped`` flags that clipping occurred.
    """

    eigenvalues: np.ndarray
    eigen_arrays: np.ndarray
    raw_eigenvalues: np.ndarray
    basis_x: FpcBasis | None = None
    basis_y: FpcBasis | None = None
    h: int | None = None
    clipped: bool = False
    _surfaces: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def clipped_mass(self) -> float:
        """Clipped negative mass relative to the retained positive mass."""
        neg = -self.raw_eigenvalues[self.raw_eigenvalues < 0].sum()
        pos = self.eigenvalues.sum()
        return float(neg / pos) if pos > 0 else float("inf")

    def eigen_surface(self, i: int) -> Surface:
        if i not in self._surfaces:
            self._surfaces[i] = reconstruct_eigenfunction(self, i)
        return self._surfaces[i]


def spectrum(
    M: np.ndarray,
    basis_x: FpcBasis | None = None,
    basis_y: FpcBasis | None = None,
    h: int | None = None,
) -> SpectrumEstimate:
    """Solve ``M Phi = lambda Phi`` through the tiled ``q1 q2 x q1 q2`` matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 4 or M.shape[:2] != M.shape[2:]:
        raise FxcovError(f"expected a (q1, q2, q1, q2) tensor, got shape {M.shape}")
    q1, q2 = M.shape[:2]
    n = q1 * q2
    tiled = M.reshape(n, n)
    if not np.array_equal(tiled, tiled.T):
        tiled = 0.5 * (tiled + tiled.T)
    vals, vecs = np.linalg.eigh(tiled)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(n)])
    signs[signs == 0] = 1.0
    vecs = vecs * signs
    scale = max(abs(vals[0]), abs(vals[-1]), np.finfo(float).tiny)
    clipped = bool(np.any(vals < -NEG_TOL * scale))
    lam = np.where(vals < 0, 0.0, vals)
    return SpectrumEstimate(
        eigenvalues=lam,
        eigen_arrays=vecs.T.reshape(n, q1, q2),
        raw_eigenvalues=vals.copy(),
        basis_x=basis_x,
        basis_y=basis_y,
        h=h,
        clipped=clipped,
    )


def reconstruct_eigenfunction(sp: SpectrumEstimate, i: int) -> Surface:
    """``phi_i(t, s) = sum_{j,k} Phi_i[j, k] theta_X,j (t) theta_Y,k (s)`` (``i`` zero-based)."""
    if sp.basis_x is None or sp.basis_y is None:
        raise FxcovError("spectrum carries no fPC bases to reconstruct from")
    if not 0 <= i < sp.size:
        raise IndexError(f"eigenfunction index {i} out of range [0, {sp.size})")
    tx = sp.basis_x.functions
    ty = sp.basis_y.functions
    return Surface(sp.basis_x.grid, tx.T @ sp.eigen_arrays[i] @ ty)


def estimate_spectrum(
    b: BivariateSeries,
    q: int | None = None,
    v: float = 0.90,
    q_max: int | None = 10,
    h: int | None = None,
    weight: str | Callable = "bartlett",
) -> SpectrumEstimate:
    """fPCA of both series, projected lag-window estimate, tiled eigensolve."""
    bx = fpc_basis(b.x, v=v, q_max=q_max, q=q)
    by = fpc_basis(b.y, v=v, q_max=q_max, q=q)
    if q is None:
        # one common cutoff so both series explain at least v
        qq = max(bx.q, by.q)
        bx, by = bx.truncate(qq), by.truncate(qq)
    h = default_bandwidth(b.T) if h is None else h
    cs = coeff_series(b, bx, by)
    M = lrc_tensor(cs, LrcConfig(h=h, weight=weight, q=bx.q))
    return spectrum(M, bx, by, h=h)
