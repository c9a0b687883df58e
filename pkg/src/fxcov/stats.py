"""Norm-based and projection-based statistics for the cross-covariance.

``F_T`` and ``F_{T,p}`` test a specified cross-covariance ``C0``; ``Z_T`` and
``Z_{T,p}`` are maximally selected CUSUM statistics for a single change in
the cross-covariance.  Partial sums use full-sample means throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fxcov.crosscov import cross_cov
from fxcov.errors import ConformabilityError, DegenerateError, FxcovError
from fxcov.fdata import BivariateSeries, Surface
from fxcov.lrc import SpectrumEstimate

LAMBDA_MIN = 1e-8
_BLOCK = 64


@dataclass(frozen=True, eq=False)
class TestConfig:
    """Projection dimension ``p``, null surface ``C0`` and the spectrum to project on."""

    __test__ = False  # not a pytest class

    spectrum: SpectrumEstimate
    p: int = 3
    C0: Surface | None = None

    def __post_init__(self):
        if not 1 <= self.p <= self.spectrum.size:
            raise FxcovError(f"p must lie in [1, {self.spectrum.size}], got {self.p}")

    def lambdas(self) -> np.ndarray:
        lam = self.spectrum.eigenvalues[: self.p]
        if lam[-1] < LAMBDA_MIN:
            raise DegenerateError(
                f"spectrum too degenerate for p = {self.p}: "
                f"lambda_{self.p} = {lam[-1]:.3g} < {LAMBDA_MIN:g}"
            )
        return lam


def _null_surface(b: BivariateSeries, C0: Surface | None) -> Surface:
    if C0 is None:
        return Surface.zeros(b.grid)
    if C0.grid != b.grid:
        raise ConformabilityError(f"C0 lives on R = {C0.grid.R}, data on R = {b.grid.R}")
    return C0


def stat_F(b: BivariateSeries, C0: Surface | None = None) -> float:
    """``T * ||C_hat - C0||^2``."""
    D = cross_cov(b).values - _null_surface(b, C0).values
    return float(b.T * np.vdot(D, D) / b.grid.R**2)


def _projections(G: np.ndarray, sp: SpectrumEstimate, p: int) -> np.ndarray:
    """Inner products of surface values ``G`` with the first ``p`` eigenfunctions.

    Works in coefficients: ``<G, phi_i> = sum_jk Phi_i[j,k] <G, theta_j (x) theta_k>``.
    """
    R = sp.basis_x.grid.R
    coef = sp.basis_x.functions @ G @ sp.basis_y.functions.T / R**2
    return np.tensordot(sp.eigen_arrays[:p], coef, axes=([1, 2], [0, 1]))


def stat_Fp(b: BivariateSeries, cfg: TestConfig) -> float:
    """``sum_{i<=p} <sqrt(T) (C_hat - C0), phi_i>^2 / lambda_i``."""
    lam = cfg.lambdas()
    sp = cfg.spectrum
    if sp.basis_x is None or sp.basis_x.grid != b.grid:
        raise ConformabilityError("spectrum bases do not match the data grid")
    D = cross_cov(b).values - _null_surface(b, cfg.C0).values
    proj = _projections(D, sp, cfg.p)
    return float(b.T * np.sum(proj**2 / lam))


def _blocked_prefix(xc: np.ndarray, yc: np.ndarray):
    """Yield ``(k_start, prefix)`` with ``prefix[m]`` the sum of the first
    ``k_start + m + 1`` outer products ``xc[i] yc[i]^T``."""
    run = np.zeros((xc.shape[1], yc.shape[1]))
    for start in range(0, xc.shape[0], _BLOCK):
        stop = min(start + _BLOCK, xc.shape[0])
        outer = np.einsum("ij,ik->ijk", xc[start:stop], yc[start:stop])
        pref = np.cumsum(outer, axis=0) + run
        run = pref[-1]
        yield start, pref


def cusum_trajectory(b: BivariateSeries) -> np.ndarray:
    """``c(k) = T ||C_hat(k/T) - (k/T) C_hat(1)||^2`` for ``k = 0..T``.

    Evaluated with a running prefix sum; the endpoints are exactly zero.
    """
    T = b.T
    if T < 2:
        raise FxcovError("CUSUM needs T >= 2")
    xc = b.x.centered()
    yc = b.y.centered()
    total = None
    for _, pref in _blocked_prefix(xc, yc):
        total = pref[-1]
    out = np.zeros(T + 1)
    norm = T * b.grid.R**2
    for start, pref in _blocked_prefix(xc, yc):
        k = np.arange(start + 1, start + 1 + len(pref))
        S = pref - (k / T)[:, None, None] * total
        out[k] = np.einsum("kij,kij->k", S, S) / norm
    return out


def projected_cusum_trajectory(b: BivariateSeries, cfg: TestConfig) -> np.ndarray:
    """``T sum_{i<=p} <C_hat(k/T) - (k/T) C_hat(1), phi_i>^2 / lambda_i``, ``k = 0..T``."""
    lam = cfg.lambdas()
    sp = cfg.spectrum
    if sp.basis_x is None or sp.basis_x.grid != b.grid:
        raise ConformabilityError("spectrum bases do not match the data grid")
    T = b.T
    sx = sp.basis_x.scores(b.x)
    sy = sp.basis_y.scores(b.y)
    prod = sx[:, :, None] * sy[:, None, :]
    pref = np.concatenate([np.zeros((1,) + prod.shape[1:]), np.cumsum(prod, axis=0)])
    k = np.arange(T + 1)
    S = (pref - (k / T)[:, None, None] * pref[-1]) / T
    proj = np.tensordot(S, sp.eigen_arrays[: cfg.p], axes=([1, 2], [1, 2]))
    return T * np.sum(proj**2 / lam, axis=1)


def stat_Z(b: BivariateSeries) -> tuple[float, int]:
    """``Z_T`` and the smallest maximizing ``k``."""
    c = cusum_trajectory(b)
    k = int(np.argmax(c))
    return float(c[k]), k


def stat_Zp(b: BivariateSeries, cfg: TestConfig) -> tuple[float, int]:
    c = projected_cusum_trajectory(b, cfg)
    k = int(np.argmax(c))
    return float(c[k]), k
