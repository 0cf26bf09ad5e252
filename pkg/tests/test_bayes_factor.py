"""Bayes factor kernels, grid averaging, and regression front ends.

High-precision reference values in this module were computed independently
with mpmath at 40 decimal digits and frozen here.
"""
from __future__ import annotations

import math
import sys

import numpy as np
import pytest
from scipy import stats

from bfdr.bayes_factor import (
    DEFAULT_OMEGA_GRID,
    GeneDesign,
    OmegaGrid,
    bf_averaged,
    bf_cox,
    bf_from_regression,
    bf_gene,
    bf_null_quantile,
    bf_null_quantiles,
    gene_log_bf,
    log_bf_averaged,
    log_bf_averaged_many,
    log_bf_cox,
    log_bf_gene,
)

# mpmath mp.dps=40: bf for z=5, se=0.1, omega=1.
BF_Z5_SE01_W1 = 23592.34007751287
# mpmath mp.dps=40: mean of bf over the default grid at z=2, se=0.5.
BF_AVG_Z2_SE05 = 1.6128690220698968


class TestOmegaGrid:
    def test_default_grid(self):
        assert DEFAULT_OMEGA_GRID.omegas == (0.1, 0.2, 0.4, 0.8, 1.6)

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="non-empty"):
            OmegaGrid(())

    @pytest.mark.parametrize("bad", [(0.0,), (-1.0,), (math.inf,), (math.nan,)])
    def test_rejects_nonpositive_scales(self, bad):
        with pytest.raises(ValueError):
            OmegaGrid(bad)


class TestSingleScaleBf:
    def test_null_z_unit_scale(self):
        # z=0, se=1, omega=1: pure shrinkage factor sqrt(1/2).
        assert bf_cox(0.0, 1.0, 1.0) == pytest.approx(math.sqrt(0.5), rel=1e-15)

    def test_moderate_z(self):
        # z=2, se=1, omega=1: sqrt(1/2) * exp(1).
        expected = math.sqrt(0.5) * math.exp(1.0)
        assert bf_cox(2.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-14)
        assert bf_cox(2.0, 1.0, 1.0) == pytest.approx(1.9221155140795583, rel=1e-14)

    def test_high_precision_reference(self):
        assert bf_cox(5.0, 0.1, 1.0) == pytest.approx(BF_Z5_SE01_W1, rel=1e-12)

    def test_symmetric_in_z(self):
        assert bf_cox(3.2, 0.7, 0.4) == bf_cox(-3.2, 0.7, 0.4)

    def test_log_twin_agrees(self):
        for z, se, w in [(0.3, 1.0, 0.2), (4.0, 0.5, 1.6), (-2.0, 0.1, 0.8)]:
            assert log_bf_cox(z, se, w) == pytest.approx(math.log(bf_cox(z, se, w)), rel=1e-14)

    def test_increasing_in_abs_z(self):
        zs = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
        vals = [log_bf_cox(z, 0.3, 0.8) for z in zs]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_below_one_at_z_zero(self):
        for w in (0.01, 0.5, 2.0, 50.0):
            assert bf_cox(0.0, 1.0, w) < 1.0

    @pytest.mark.parametrize("bad_se", [0.0, -1.0, math.nan])
    def test_se_validation(self, bad_se):
        with pytest.raises(ValueError):
            log_bf_cox(1.0, bad_se, 1.0)


class TestAveragedBf:
    def test_matches_mean_over_grid(self):
        z, se = 1.7, 0.4
        expected = np.mean([bf_cox(z, se, w) for w in DEFAULT_OMEGA_GRID.omegas])
        assert bf_averaged(z, se) == pytest.approx(expected, rel=1e-13)

    def test_high_precision_reference(self):
        assert bf_averaged(2.0, 0.5) == pytest.approx(BF_AVG_Z2_SE05, rel=1e-12)

    def test_single_point_grid_reduces_to_kernel(self):
        grid = OmegaGrid((0.7,))
        assert bf_averaged(1.2, 0.9, grid) == pytest.approx(bf_cox(1.2, 0.9, 0.7), rel=1e-14)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(7)
        z = rng.normal(size=40)
        se = rng.uniform(0.05, 2.0, size=40)
        batch = log_bf_averaged_many(z, se)
        scalars = [log_bf_averaged(zi, si) for zi, si in zip(z, se)]
        np.testing.assert_allclose(batch, scalars, rtol=1e-13)

    def test_extreme_z_saturates_finite(self):
        lb = log_bf_averaged(60.0, 0.1)
        assert lb > 709.0
        nat = bf_averaged(60.0, 0.1)
        assert nat == sys.float_info.max
        assert math.isfinite(nat)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            log_bf_averaged_many(np.zeros(3), np.ones(4))


class TestGeneLevelBf:
    def test_plain_mean(self):
        assert bf_gene([2.0, 4.0]) == pytest.approx(3.0, rel=1e-15)

    def test_log_twin(self):
        lbs = [math.log(2.0), math.log(4.0)]
        assert log_bf_gene(lbs) == pytest.approx(math.log(3.0), rel=1e-14)

    def test_log_form_survives_huge_components(self):
        # Mean of exp([800, 700]) overflows; the log form must not.
        out = log_bf_gene([800.0, 700.0])
        assert out == pytest.approx(800.0 + math.log1p(math.exp(-100.0)) - math.log(2.0), rel=1e-13)

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ValueError):
            log_bf_gene([])
        with pytest.raises(ValueError):
            log_bf_gene([1.0, math.nan])


class TestRegression:
    @staticmethod
    def _simulate(n=60, seed=3, beta=0.7, sigma=1.2):
        rng = np.random.default_rng(seed)
        g = rng.binomial(2, 0.3, size=n).astype(float)
        y = 0.5 + beta * g + rng.normal(0.0, sigma, size=n)
        return y, g

    def test_matches_least_squares_oracle(self):
        y, g = self._simulate()
        sigma = 1.2
        res = bf_from_regression(y, g, sigma=sigma)
        # Independent slope fit.
        slope, intercept = np.polyfit(g, y, 1)
        gc = g - g.mean()
        sxx = float(gc @ gc)
        se_expected = sigma / math.sqrt(sxx)
        beta_hat = float(gc @ (y - y.mean())) / sxx
        assert beta_hat == pytest.approx(slope, rel=1e-10)
        assert res.se == pytest.approx(se_expected, rel=1e-12)
        assert res.z == pytest.approx(beta_hat / se_expected, rel=1e-12)
        assert res.bf == pytest.approx(bf_averaged(res.z, res.se), rel=1e-13)

    def test_estimated_sigma_matches_residual_formula(self):
        y, g = self._simulate(seed=11)
        res = bf_from_regression(y, g, sigma=None, estimate_sigma=True)
        slope, intercept = np.polyfit(g, y, 1)
        resid = y - (intercept + slope * g)
        sigma_hat = math.sqrt(float(resid @ resid) / (len(y) - 2))
        gc = g - g.mean()
        assert res.se == pytest.approx(sigma_hat / math.sqrt(float(gc @ gc)), rel=1e-10)

    def test_constant_genotype_rejected(self):
        y = np.arange(10.0)
        with pytest.raises(ValueError, match="constant"):
            bf_from_regression(y, np.ones(10), sigma=1.0)

    def test_too_few_observations(self):
        with pytest.raises(ValueError, match="at least 3"):
            bf_from_regression([1.0, 2.0], [0.0, 1.0], sigma=1.0)


class TestNullQuantiles:
    def test_median_via_chi_square(self):
        se = 0.37
        z_med = math.sqrt(stats.chi2.ppf(0.5, df=1))
        assert bf_null_quantile(se, 0.5) == pytest.approx(bf_averaged(z_med, se), rel=1e-13)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(19)
        se = 0.25
        z = rng.standard_normal(200_000)
        sample = np.exp(log_bf_averaged_many(z, np.full_like(z, se)))
        for gamma in (0.25, 0.5, 0.9):
            emp = np.quantile(sample, gamma)
            assert bf_null_quantile(se, gamma) == pytest.approx(emp, rel=0.02)

    def test_monotone_in_gamma(self):
        qs = [bf_null_quantile(0.2, g) for g in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert all(a < b for a, b in zip(qs, qs[1:]))

    def test_batch_matches_scalar(self):
        ses = np.array([0.1, 0.4, 1.0])
        batch = bf_null_quantiles(ses, 0.5)
        np.testing.assert_allclose(batch, [bf_null_quantile(s, 0.5) for s in ses], rtol=1e-13)

    @pytest.mark.parametrize("bad", [0.0, 1.0])
    def test_gamma_range(self, bad):
        with pytest.raises(ValueError, match="gamma"):
            bf_null_quantile(0.5, bad)


class TestGeneDesign:
    @staticmethod
    def _gene(n=50, k=6, seed=23):
        rng = np.random.default_rng(seed)
        G = rng.binomial(2, 0.3, size=(n, k)).astype(np.int8)
        y = rng.normal(size=n)
        return y, G

    def test_z_batch_matches_per_variant_regression(self):
        y, G = self._gene()
        design = GeneDesign(G, sigma=1.0)
        z = design.z_batch(y)[:, 0]
        for j, col in enumerate(design.kept_columns):
            res = bf_from_regression(y, G[:, col].astype(float), sigma=1.0)
            assert z[j] == pytest.approx(res.z, rel=1e-10)

    def test_drops_constant_columns(self):
        y, G = self._gene()
        G = G.copy()
        G[:, 2] = 1
        design = GeneDesign(G, sigma=1.0)
        assert 2 not in design.kept_columns
        assert len(design.kept_columns) == G.shape[1] - 1

    def test_all_constant_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            GeneDesign(np.ones((20, 3), dtype=np.int8), sigma=1.0)

    def test_gene_log_bf_is_log_mean_of_variant_bfs(self):
        y, G = self._gene(seed=5)
        sigma = 0.9
        out = gene_log_bf(y, G, sigma=sigma)
        per_variant = []
        for j in range(G.shape[1]):
            res = bf_from_regression(y, G[:, j].astype(float), sigma=sigma)
            per_variant.append(res.bf)
        assert out == pytest.approx(math.log(np.mean(per_variant)), rel=1e-10)

    def test_batched_phenotypes_match_single(self):
        y, G = self._gene(seed=9)
        rng = np.random.default_rng(31)
        Y = rng.normal(size=(len(y), 4))  # one column per phenotype
        design = GeneDesign(G, sigma=1.0)
        batch = design.log_gene_bf(Y)
        singles = [design.log_gene_bf(Y[:, i])[0] for i in range(4)]
        np.testing.assert_allclose(batch, singles, rtol=1e-12)
