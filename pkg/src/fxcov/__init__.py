"""Inference for the cross-covariance of two functional time series."""

from fxcov.crosscov import PartialCrossCov, cross_cov_distance, partial_cross_cov
from fxcov.errors import ConformabilityError, DegenerateError, FxcovError, ParseError
from fxcov.fdata import (
    BivariateSeries,
    FunctionalSeries,
    Grid,
    Surface,
    apply_lag,
    cidr_transform,
    inner_product_1d,
    inner_product_2d,
    mean_curve,
    norm_2d,
)
from fxcov.fpca import FpcBasis, fpc_basis, sample_cov_matrix
from fxcov.lrc import (
    CoeffSeries,
    LrcConfig,
    SpectrumEstimate,
    bartlett_weight,
    coeff_series,
    default_bandwidth,
    estimate_spectrum,
    lrc_tensor,
    reconstruct_eigenfunction,
    spectrum,
)
from fxcov.stats import TestConfig, stat_F, stat_Fp, stat_Z, stat_Zp

__version__ = "0.1.0"

__all__ = [
    "BivariateSeries",
    "CoeffSeries",
    "ConformabilityError",
    "DegenerateError",
    "FpcBasis",
    "FunctionalSeries",
    "FxcovError",
    "Grid",
    "LrcConfig",
    "ParseError",
    "PartialCrossCov",
    "SpectrumEstimate",
    "Surface",
    "TestConfig",
    "apply_lag",
    "bartlett_weight",
    "cidr_transform",
    "coeff_series",
    "cross_cov_distance",
    "default_bandwidth",
    "estimate_spectrum",
    "fpc_basis",
    "inner_product_1d",
    "inner_product_2d",
    "lrc_tensor",
    "mean_curve",
    "norm_2d",
    "partial_cross_cov",
    "reconstruct_eigenfunction",
    "sample_cov_matrix",
    "spectrum",
    "stat_F",
    "stat_Fp",
    "stat_Z",
    "stat_Zp",
]
