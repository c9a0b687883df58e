"""Partial- and full-sample cross-covariance surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fxcov.errors import FxcovError
from fxcov.fdata import BivariateSeries, Surface, norm_2d


@dataclass(frozen=True)
class PartialCrossCov:
    surface: Surface
    fraction: float
    T: int

    @property
    def k(self) -> int:
        """Number of summed observations, ``floor(T * fraction)``."""
        return math.floor(self.T * self.fraction)


def _prefix_length(T: int, x: float) -> int:
    if not 0.0 <= x <= 1.0:
        raise FxcovError(f"fraction must lie in [0, 1], got {x!r}")
    return math.floor(T * x)


def partial_cross_cov(b: BivariateSeries, x: float) -> PartialCrossCov:
    """Estimate ``x * C_XY`` from the first ``floor(T x)`` pairs.

    Both series are centered with their FULL-sample means, not the means of
    the prefix, and the sum is scaled by ``1 / T`` whatever its length.  At
    ``x = 1`` this is the usual cross-covariance estimator.
    """
    if b.T < 2:
        raise FxcovError("cross-covariance needs T >= 2")
    k = _prefix_length(b.T, x)
    xc = b.x.centered()[:k]
    yc = b.y.centered()[:k]
    return PartialCrossCov(Surface(b.grid, xc.T @ yc / b.T), float(x), b.T)


def cross_cov(b: BivariateSeries) -> Surface:
    """Full-sample estimate, same as ``partial_cross_cov(b, 1).surface``."""
    return partial_cross_cov(b, 1.0).surface


def cross_cov_distance(b: BivariateSeries, C0: Surface) -> float:
    """L2 distance between the full-sample estimate and ``C0``, unscaled by T."""
    return norm_2d(cross_cov(b) - C0)
