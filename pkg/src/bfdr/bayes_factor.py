"""Bayes factors for linear-model association tests.

The single-variant Bayes factor compares a normal effect prior against a
point null for an estimated coefficient with standard error ``u``. With a
prior scale ``omega`` and Wald statistic ``z`` it has the closed form

    BF(z, u, omega) = sqrt(u^2 / (omega^2 + u^2))
                      * exp((z^2 / 2) * omega^2 / (omega^2 + u^2))

which this module always evaluates through its logarithm. Natural-scale
return values saturate at the largest finite float instead of overflowing;
callers that may meet extreme evidence should use the ``log_*`` twins,
which are exact for any magnitude.

Averaging over a grid of prior scales and over the variants of a gene is
arithmetic-mean averaging, done in log space with log-sum-exp.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import chi2

__all__ = [
    "OmegaGrid",
    "DEFAULT_OMEGA_GRID",
    "log_bf_cox",
    "bf_cox",
    "log_bf_averaged",
    "bf_averaged",
    "log_bf_averaged_many",
    "log_bf_gene",
    "bf_gene",
    "RegressionResult",
    "bf_from_regression",
    "bf_null_quantile",
    "bf_null_quantiles",
    "GeneDesign",
    "gene_log_bf",
]

_FLOAT_MAX = sys.float_info.max


@dataclass(frozen=True)
class OmegaGrid:
    """A non-empty grid of positive prior standard deviations."""

    omegas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if not self.omegas:
            raise ValueError("omega grid must be non-empty")
        for w in self.omegas:
            if not (math.isfinite(w) and w > 0.0):
                raise ValueError("omega values must be positive and finite")

    def __len__(self) -> int:
        return len(self.omegas)


DEFAULT_OMEGA_GRID = OmegaGrid((0.1, 0.2, 0.4, 0.8, 1.6))


def _omegas(grid: OmegaGrid | Iterable[float]) -> tuple[float, ...]:
    if isinstance(grid, OmegaGrid):
        return grid.omegas
    return OmegaGrid(tuple(grid)).omegas


def _check_zu(z: float, se: float) -> tuple[float, float]:
    z = float(z)
    se = float(se)
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    if not (math.isfinite(se) and se > 0.0):
        raise ValueError("se must be positive and finite")
    return z, se


def _exp_saturated(log_value: float) -> float:
    """exp() that returns the float max instead of overflowing to inf."""
    if log_value >= 709.0:
        return _FLOAT_MAX
    v = math.exp(log_value)
    return v if v > 0.0 else 5e-324


def log_bf_cox(z: float, se: float, omega: float) -> float:
    """Log Bayes factor for one effect-prior scale ``omega``."""
    z, u = _check_zu(z, se)
    w = float(omega)
    if not (math.isfinite(w) and w > 0.0):
        raise ValueError("omega must be positive and finite")
    u2 = u * u
    w2 = w * w
    shrink = w2 / (w2 + u2)
    return 0.5 * math.log(u2 / (w2 + u2)) + 0.5 * z * z * shrink


def bf_cox(z: float, se: float, omega: float) -> float:
    """Natural-scale single-scale Bayes factor (computed via its log)."""
    return _exp_saturated(log_bf_cox(z, se, omega))


def log_bf_averaged(z: float, se: float, grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID) -> float:
    """Log of the grid-averaged Bayes factor (arithmetic mean over scales)."""
    omegas = _omegas(grid)
    logs = [log_bf_cox(z, se, w) for w in omegas]
    return float(logsumexp(logs)) - math.log(len(omegas))


def bf_averaged(z: float, se: float, grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID) -> float:
    """Natural-scale grid-averaged Bayes factor."""
    return _exp_saturated(log_bf_averaged(z, se, grid))


def log_bf_averaged_many(
    z: np.ndarray,
    se: np.ndarray,
    grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID,
) -> np.ndarray:
    """Vectorized grid-averaged log Bayes factors.

    ``z`` and ``se`` are broadcast against each other; the result has their
    broadcast shape. This is the hot path used by the simulation and
    permutation engines.
    """
    omegas = np.asarray(_omegas(grid), dtype=float)
    z = np.asarray(z, dtype=float)
    se = np.asarray(se, dtype=float)
    if np.any(~np.isfinite(z)):
        raise ValueError("z must be finite")
    if np.any(~np.isfinite(se)) or np.any(se <= 0.0):
        raise ValueError("se must be positive and finite")
    u2 = (se * se)[..., None]
    w2 = omegas * omegas
    shrink = w2 / (w2 + u2)
    lb = 0.5 * np.log(u2 / (w2 + u2)) + 0.5 * (z * z)[..., None] * shrink
    return logsumexp(lb, axis=-1) - math.log(len(omegas))


def log_bf_gene(log_bfs: Sequence[float] | np.ndarray) -> float:
    """Log of the arithmetic mean of Bayes factors given on log scale."""
    arr = np.asarray(log_bfs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("log_bfs must be a non-empty 1-d sequence")
    if np.any(~np.isfinite(arr)):
        raise ValueError("log_bfs must be finite")
    return float(logsumexp(arr)) - math.log(arr.size)


def bf_gene(bfs: Sequence[float] | np.ndarray) -> float:
    """Arithmetic mean of natural-scale Bayes factors."""
    arr = np.asarray(bfs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("bfs must be a non-empty 1-d sequence")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("bfs must be positive and finite")
    return float(arr.mean())


class RegressionResult(NamedTuple):
    """Wald statistic, standard error, and averaged Bayes factor."""

    z: float
    se: float
    bf: float


def bf_from_regression(
    y: Sequence[float] | np.ndarray,
    g: Sequence[float] | np.ndarray,
    sigma: float,
    grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID,
    estimate_sigma: bool = False,
) -> RegressionResult:
    """Simple linear regression of ``y`` on ``g`` plus its averaged Bayes factor.

    The residual standard deviation is taken as known (``sigma``) unless
    ``estimate_sigma`` is set, in which case it is estimated from the
    residual sum of squares with n - 2 degrees of freedom.
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if y.ndim != 1 or g.ndim != 1 or y.shape != g.shape:
        raise ValueError("y and g must be 1-d arrays of equal length")
    n = y.size
    if n < 3:
        raise ValueError("need at least 3 observations")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(g)):
        raise ValueError("y and g must be finite")
    gc = g - g.mean()
    sxx = float(gc @ gc)
    if sxx <= 0.0:
        raise ValueError("g must not be constant")
    yc = y - y.mean()
    beta = float(gc @ yc) / sxx
    if estimate_sigma:
        resid = yc - beta * gc
        sigma = math.sqrt(float(resid @ resid) / (n - 2))
        if sigma <= 0.0:
            raise ValueError("residuals are degenerate; cannot estimate sigma")
    else:
        sigma = float(sigma)
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise ValueError("sigma must be positive and finite")
    se = sigma / math.sqrt(sxx)
    z = beta / se
    return RegressionResult(z=z, se=se, bf=bf_averaged(z, se, grid))


def bf_null_quantile(
    se: float,
    gamma: float,
    grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID,
) -> float:
    """The gamma-quantile of the averaged Bayes factor under the null.

    Under the null the Wald statistic is standard normal, so z^2 is
    chi-squared with one degree of freedom, and the averaged Bayes factor
    is strictly increasing in z^2 for a fixed standard error. Its null
    gamma-quantile is therefore the Bayes factor evaluated at the
    chi-squared gamma-quantile of z^2; no resampling is needed when the
    null distribution of z is known.
    """
    g = float(gamma)
    if not 0.0 < g < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    zq = math.sqrt(chi2.ppf(g, df=1))
    return bf_averaged(zq, se, grid)


def bf_null_quantiles(
    se: np.ndarray,
    gamma: float,
    grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID,
) -> np.ndarray:
    """Vectorized :func:`bf_null_quantile` over an array of standard errors."""
    g = float(gamma)
    if not 0.0 < g < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    zq = math.sqrt(chi2.ppf(g, df=1))
    se = np.asarray(se, dtype=float)
    log_q = log_bf_averaged_many(np.full(se.shape, zq), se, grid)
    return np.exp(np.minimum(log_q, 709.0))


class GeneDesign:
    """Precomputed design for repeated association scans of one gene.

    Centers the genotype matrix once, drops monomorphic (constant) columns,
    and caches the per-variant pieces of the Bayes-factor formula so that
    scanning many phenotype vectors (observed plus permuted) reduces to one
    matrix product and vectorized elementwise math.
    """

    def __init__(
        self,
        G: np.ndarray,
        sigma: float,
        grid: OmegaGrid | Iterable[float] | None = DEFAULT_OMEGA_GRID,
    ):
        G = np.asarray(G, dtype=float)
        if G.ndim != 2:
            raise ValueError("G must be a 2-d matrix (individuals x variants)")
        n, k = G.shape
        if n < 3:
            raise ValueError("need at least 3 individuals")
        if k < 1:
            raise ValueError("G must have at least one variant column")
        sigma = float(sigma)
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise ValueError("sigma must be positive and finite")
        Gc = G - G.mean(axis=0, keepdims=True)
        sxx = np.einsum("ij,ij->j", Gc, Gc)
        keep = sxx > 0.0
        if not np.any(keep):
            raise ValueError("all variant columns are constant")
        self.n = n
        self.kept_columns = np.nonzero(keep)[0]
        self._Gc = np.ascontiguousarray(Gc[:, keep])
        sxx = sxx[keep]
        self._z_scale = 1.0 / (sigma * np.sqrt(sxx))
        self.se = sigma / np.sqrt(sxx)
        u2 = self.se * self.se
        if grid is None:
            self._log_prefactor = None
            self._shrink = None
            self._n_omegas = 0
        else:
            omegas = np.asarray(_omegas(grid), dtype=float)
            w2 = omegas * omegas
            U2 = u2[:, None]
            self._log_prefactor = 0.5 * np.log(U2 / (w2 + U2))
            self._shrink = 0.5 * w2 / (w2 + U2)
            self._n_omegas = omegas.size

    @property
    def n_variants(self) -> int:
        return self._Gc.shape[1]

    def _as_batch(self, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        squeeze = Y.ndim == 1
        if squeeze:
            Y = Y[:, None]
        if Y.ndim != 2 or Y.shape[0] != self.n:
            raise ValueError("phenotype batch must have one row per individual")
        return Y

    def z_batch(self, Y: np.ndarray) -> np.ndarray:
        """Wald statistics, one row per kept variant, one column per phenotype."""
        Y = self._as_batch(Y)
        Yc = Y - Y.mean(axis=0, keepdims=True)
        sxy = self._Gc.T @ Yc
        return sxy * self._z_scale[:, None]

    def log_gene_bf(self, Y: np.ndarray) -> np.ndarray:
        """Gene-level log Bayes factor for each phenotype column.

        Per variant the Bayes factor is averaged over the prior-scale grid;
        the gene statistic is the arithmetic mean over kept variants. Both
        means are taken with log-sum-exp.
        """
        if self._shrink is None:
            raise ValueError("design was built without a prior-scale grid")
        Z = self.z_batch(Y)
        lb = self._log_prefactor[:, :, None] + self._shrink[:, :, None] * (Z * Z)[:, None, :]
        per_variant = logsumexp(lb, axis=1) - math.log(self._n_omegas)
        out = logsumexp(per_variant, axis=0) - math.log(self.n_variants)
        return np.atleast_1d(out)


def gene_log_bf(
    y: np.ndarray,
    G: np.ndarray,
    sigma: float,
    grid: OmegaGrid | Iterable[float] = DEFAULT_OMEGA_GRID,
) -> float:
    """Observed gene-level log Bayes factor for one phenotype vector."""
    design = GeneDesign(G, sigma, grid)
    return float(design.log_gene_bf(np.asarray(y, dtype=float))[0])
