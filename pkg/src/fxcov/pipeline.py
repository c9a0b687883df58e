"""End-to-end test procedures: spectrum estimation, statistics, p-values."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from fxcov import limits
from fxcov.fdata import BivariateSeries, Surface
from fxcov.lrc import SpectrumEstimate, estimate_spectrum
from fxcov.stats import (
    TestConfig,
    cusum_trajectory,
    projected_cusum_trajectory,
    stat_F,
    stat_Fp,
)

LABELS = {"F": "F_T", "Fp": "F_T,p", "Z": "Z_T", "Zp": "Z_T,p"}
LEVELS = (0.10, 0.05, 0.01)


@dataclass(frozen=True)
class Settings:
    """Tuning knobs shared by the tests, the CLI and the simulation harness.

    ``q = None`` selects the fPC cutoff by the variance threshold ``v``
    (capped at ``q_max``); ``h = None`` uses ``ceil(T ** (1/5))``.
    """

    q: int | None = None
    v: float = 0.90
    q_max: int | None = 10
    p: int = 3
    h: int | None = None
    n_reps: int = limits.DEFAULT_REPS
    bridge_grid: int = limits.DEFAULT_BRIDGE_GRID
    R: int = 100
    burn_in: int = 100

    @classmethod
    def simulation(cls, **kw) -> "Settings":
        return replace(cls(q=3, p=3), **kw)


@dataclass
class StatisticResult:
    name: str
    statistic: float
    p_value: float
    quantiles: dict[str, float]
    null: str
    argmax: int | None = None


@dataclass
class TestReport:
    __test__ = False

    results: list[StatisticResult]
    spectrum: dict
    T: int
    lag: int
    manifest: dict = field(default_factory=dict)
    trajectories: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("trajectories")
        return d

    def result(self, name: str) -> StatisticResult:
        for r in self.results:
            if r.name == LABELS.get(name, name):
                return r
        raise KeyError(name)


def spectrum_summary(sp: SpectrumEstimate, p: int) -> dict:
    return {
        "lambdas": [float(x) for x in sp.eigenvalues],
        "variance_explained": {
            "x": sp.basis_x.variance_explained,
            "y": sp.basis_y.variance_explained,
        },
        "q": sp.basis_x.q,
        "p": p,
        "h": sp.h,
        "clipped": sp.clipped,
        "clipped_mass": sp.clipped_mass,
    }


def fit_spectrum(b: BivariateSeries, settings: Settings) -> SpectrumEstimate:
    return estimate_spectrum(b, q=settings.q, v=settings.v, q_max=settings.q_max, h=settings.h)


def evaluate_statistics(
    b: BivariateSeries,
    statistics: Sequence[str],
    settings: Settings,
    C0: Surface | None = None,
    sp: SpectrumEstimate | None = None,
) -> dict:
    """Statistic values plus the spectrum they need, without p-values."""
    sp = fit_spectrum(b, settings) if sp is None else sp
    out: dict = {"lambdas": sp.eigenvalues, "spectrum": sp}
    cfg = None
    if any(s in statistics for s in ("Fp", "Zp")):
        cfg = TestConfig(sp, p=settings.p, C0=C0)
    if "F" in statistics:
        out["F"] = stat_F(b, C0)
    if "Fp" in statistics:
        out["Fp"] = stat_Fp(b, cfg)
    if "Z" in statistics:
        c = cusum_trajectory(b)
        out["Z"] = (float(c.max()), int(np.argmax(c)))
        out["Z_trajectory"] = c
    if "Zp" in statistics:
        c = projected_cusum_trajectory(b, cfg)
        out["Zp"] = (float(c.max()), int(np.argmax(c)))
        out["Zp_trajectory"] = c
    return out


def _value(rec, name):
    v = rec[name]
    return v[0] if isinstance(v, tuple) else v


def batch_pvalues(
    records: Sequence[dict], statistics: Sequence[str], settings: Settings, mc_seed: int
) -> dict[str, np.ndarray]:
    """P-values for many evaluated datasets, all using the Monte Carlo seed ``mc_seed``."""
    out = {}
    lams = np.array([r["lambdas"] for r in records])
    for name in statistics:
        stats = np.array([_value(r, name) for r in records])
        if name == "F":
            out[name] = limits.weighted_chisq_pvalues(lams, stats, settings.n_reps, mc_seed)
        elif name == "Fp":
            out[name] = np.array([limits.chisq_p_pvalue(s, settings.p) for s in stats])
        elif name == "Z":
            out[name] = limits.sup_bridge_pvalues(
                lams, stats, settings.bridge_grid, settings.n_reps, mc_seed
            )
        elif name == "Zp":
            null = limits.sim_kiefer(settings.p, settings.bridge_grid, settings.n_reps, mc_seed)
            out[name] = np.array([null.p_value(s) for s in stats])
        else:
            raise ValueError(f"unknown statistic {name!r}")
    return out


def null_distribution(name: str, sp: SpectrumEstimate, settings: Settings, mc_seed: int):
    lam = sp.eigenvalues
    if name == "F":
        return limits.sim_weighted_chisq(lam, settings.n_reps, mc_seed)
    if name == "Fp":
        return limits.chisq_p(settings.p)
    if name == "Z":
        return limits.sim_sup_weighted_bridges(lam, settings.bridge_grid, settings.n_reps, mc_seed)
    if name == "Zp":
        return limits.sim_kiefer(settings.p, settings.bridge_grid, settings.n_reps, mc_seed)
    raise ValueError(f"unknown statistic {name!r}")


def run_tests(
    b: BivariateSeries,
    statistics: Sequence[str],
    settings: Settings = Settings(),
    mc_seed: int = 0,
    C0: Surface | None = None,
) -> TestReport:
    """Evaluate the requested statistics on ``b`` and attach null-law p-values.

    ``F``/``Fp`` test ``C_XY = C0`` (zero by default); ``Z``/``Zp`` test for a
    change in the cross-covariance and report the maximizing index.
    """
    rec = evaluate_statistics(b, statistics, settings, C0)
    sp = rec["spectrum"]
    results = []
    trajectories = {}
    for name in statistics:
        null = null_distribution(name, sp, settings, mc_seed)
        value = _value(rec, name)
        argmax = rec[name][1] if isinstance(rec[name], tuple) else None
        results.append(
            StatisticResult(
                LABELS[name],
                float(value),
                float(null.p_value(value)),
                null.quantiles(tuple(1 - a for a in LEVELS)),
                null.kind,
                argmax,
            )
        )
        if name + "_trajectory" in rec:
            trajectories[LABELS[name]] = rec[name + "_trajectory"].tolist()
    return TestReport(
        results, spectrum_summary(sp, settings.p), b.T, b.lag, trajectories=trajectories
    )
