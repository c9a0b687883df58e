"""Null limit distributions of the four statistics.

Weighted chi-square sums and suprema of (weighted) squared Brownian bridges
are simulated; ``chi2(p)`` is closed form.

Every random draw comes from a Philox generator keyed by the caller's seed,
the law being simulated, and the component index (plus a block index for
bridge paths).  Replication ``r`` of component ``i`` is therefore the same
number no matter how many replications or components are requested, and
blocks could be generated by independent workers without changing results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from fxcov.errors import FxcovError

DEFAULT_REPS = 10_000
DEFAULT_BRIDGE_GRID = 1_000
BLOCK_REPS = 256

_TAG_CHISQ = 1
_TAG_BRIDGE = 2


def _generator(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """A simulated (or closed-form) null law.

    ``samples`` are sorted ascending and empty for the closed-form ``chisq_p``
    kind.  P-values of simulated laws are ``(1 + #{samples >= stat}) / (n + 1)``
    so they are never zero.
    """

    kind: str
    parameters: tuple
    samples: np.ndarray = field(repr=False)
    n_reps: int = 0
    seed: int | None = None
    bridge_grid: int | None = None

    def p_value(self, stat: float) -> float:
        if self.kind == "chisq_p":
            return chisq_p_pvalue(stat, self.parameters[0])
        n = len(self.samples)
        exceed = n - np.searchsorted(self.samples, stat, side="left")
        return float((1 + exceed) / (n + 1))

    def quantile(self, prob: float) -> float:
        if self.kind == "chisq_p":
            return float(special.chdtri(self.parameters[0], 1.0 - prob))
        return float(np.quantile(self.samples, prob))

    def quantiles(self, probs=(0.90, 0.95, 0.99)) -> dict[str, float]:
        return {f"{p:.2f}": self.quantile(p) for p in probs}


def _check_weights(lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.size == 0:
        raise FxcovError("need at least one eigenvalue")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise FxcovError("weights must be finite and nonnegative")
    return lam


def brownian_bridge_path(grid_size: int, rng: np.random.Generator) -> np.ndarray:
    """One bridge on ``x_k = k / grid_size``, ``k = 0..grid_size``."""
    return _bridges(rng, 1, grid_size)[0]


def _bridges(rng: np.random.Generator, n: int, grid_size: int) -> np.ndarray:
    if grid_size < 2:
        raise FxcovError("bridge grid needs at least 2 intervals")
    W = np.zeros((n, grid_size + 1))
    np.cumsum(rng.standard_normal((n, grid_size)), axis=1, out=W[:, 1:])
    W /= np.sqrt(grid_size)
    x = np.arange(grid_size + 1) / grid_size
    B = W - x * W[:, -1:]
    B[:, -1] = 0.0  # W(1) - 1 * W(1) already; guard signed zero
    return B


def _chisq_normals(seed: int, component: int, n_reps: int) -> np.ndarray:
    return _generator(seed, _TAG_CHISQ, component).standard_normal(n_reps)


def chisq_draws(lam, n_reps: int = DEFAULT_REPS, seed: int = 0) -> np.ndarray:
    """Unsorted draws of ``sum_i lam_i N_i^2`` in replication order."""
    lam = _check_weights(lam)
    if n_reps < 1:
        raise FxcovError("n_reps must be >= 1")
    out = np.zeros(n_reps)
    for i, w in enumerate(lam):
        if w != 0.0:
            out += w * _chisq_normals(seed, i, n_reps) ** 2
    return out


def sim_weighted_chisq(lam, n_reps: int = DEFAULT_REPS, seed: int = 0) -> NullDistribution:
    lam = _check_weights(lam)
    draws = np.sort(chisq_draws(lam, n_reps, seed))
    return NullDistribution("weighted_chisq", tuple(lam.tolist()), draws, n_reps, seed)


def weighted_chisq_pvalues(lams, stats, n_reps: int = DEFAULT_REPS, seed: int = 0) -> np.ndarray:
    """Monte Carlo p-values for many ``(lam, stat)`` pairs sharing one seed.

    Row ``m`` equals ``sim_weighted_chisq(lams[m], n_reps, seed).p_value(stats[m])``.
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    stats = np.asarray(stats, dtype=float)
    if lams.shape[0] != stats.shape[0]:
        raise FxcovError("one weight vector per statistic is required")
    sq = np.stack([_chisq_normals(seed, i, n_reps) ** 2 for i in range(lams.shape[1])])
    out = np.empty(len(stats))
    for m, (lam, stat) in enumerate(zip(lams, stats)):
        draws = np.zeros(n_reps)
        for i, w in enumerate(_check_weights(lam)):
            if w != 0.0:
                draws += w * sq[i]
        out[m] = (1 + np.count_nonzero(draws >= stat)) / (n_reps + 1)
    return out


def chisq_p_pvalue(stat: float, p: int) -> float:
    """Upper tail ``P(chi2(p) >= stat)`` via the regularized incomplete gamma."""
    if p < 1:
        raise FxcovError("degrees of freedom must be >= 1")
    if stat <= 0:
        return 1.0
    return float(special.gammaincc(p / 2.0, stat / 2.0))


def chisq_p(p: int) -> NullDistribution:
    return NullDistribution("chisq_p", (int(p),), np.empty(0))


def _bridge_block_squares(seed: int, component: int, block: int, n: int, grid_size: int):
    rng = _generator(seed, _TAG_BRIDGE, grid_size, component, block)
    return _bridges(rng, n, grid_size) ** 2


def _blocks(n_reps: int):
    for block, start in enumerate(range(0, n_reps, BLOCK_REPS)):
        yield block, start, min(BLOCK_REPS, n_reps - start)


def _block_squares(m: int, seed: int, block: int, n: int, grid_size: int) -> np.ndarray:
    return np.stack([_bridge_block_squares(seed, i, block, n, grid_size) for i in range(m)])


def _block_sups(lams: np.ndarray, sq: np.ndarray) -> np.ndarray:
    """Suprema of the weighted sums, shape ``(len(lams), n)`` for ``sq`` of shape ``(m, n, G+1)``."""
    m, n, g = sq.shape
    weighted = lams @ sq.reshape(m, -1)
    return weighted.reshape(len(lams), n, g).max(axis=2)


def sup_bridge_draws(
    lam, grid_size: int = DEFAULT_BRIDGE_GRID, n_reps: int = DEFAULT_REPS, seed: int = 0
) -> np.ndarray:
    """Unsorted draws of ``max_k sum_i lam_i B_i(x_k)^2`` in replication order."""
    lam = _check_weights(lam)
    if n_reps < 1:
        raise FxcovError("n_reps must be >= 1")
    out = np.empty(n_reps)
    for block, start, n in _blocks(n_reps):
        sq = _block_squares(len(lam), seed, block, n, grid_size)
        out[start : start + n] = _block_sups(lam[None, :], sq)[0]
    return out


def sim_sup_weighted_bridges(
    lam, grid_size: int = DEFAULT_BRIDGE_GRID, n_reps: int = DEFAULT_REPS, seed: int = 0
) -> NullDistribution:
    lam = _check_weights(lam)
    draws = np.sort(sup_bridge_draws(lam, grid_size, n_reps, seed))
    return NullDistribution(
        "sup_weighted_bridges", tuple(lam.tolist()), draws, n_reps, seed, grid_size
    )


def sim_kiefer(
    p: int, grid_size: int = DEFAULT_BRIDGE_GRID, n_reps: int = DEFAULT_REPS, seed: int = 0
) -> NullDistribution:
    """``sup_x sum_{i<=p} B_i(x)^2``, the limit of the projected CUSUM statistic."""
    if p < 1:
        raise FxcovError("p must be >= 1")
    draws = np.sort(sup_bridge_draws(np.ones(p), grid_size, n_reps, seed))
    return NullDistribution("kiefer_p", (int(p),), draws, n_reps, seed, grid_size)


def sup_bridge_pvalues(
    lams,
    stats,
    grid_size: int = DEFAULT_BRIDGE_GRID,
    n_reps: int = DEFAULT_REPS,
    seed: int = 0,
    chunk: int = 32,
) -> np.ndarray:
    """Monte Carlo p-values for many ``(lam, stat)`` pairs sharing one seed.

    Streams the bridge blocks once for all pairs; row ``m`` agrees with
    ``sim_sup_weighted_bridges(lams[m], grid_size, n_reps, seed).p_value(stats[m])``
    up to ties broken by round-off in the weighted sums.
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    stats = np.asarray(stats, dtype=float)
    if lams.shape[0] != stats.shape[0]:
        raise FxcovError("one weight vector per statistic is required")
    for lam in lams:
        _check_weights(lam)
    exceed = np.zeros(len(stats), dtype=np.int64)
    for block, _, n in _blocks(n_reps):
        sq = _block_squares(lams.shape[1], seed, block, n, grid_size)
        for lo in range(0, len(stats), chunk):
            sups = _block_sups(lams[lo : lo + chunk], sq)
            exceed[lo : lo + chunk] += np.count_nonzero(
                sups >= stats[lo : lo + chunk, None], axis=1
            )
    return (1 + exceed) / (n_reps + 1)
