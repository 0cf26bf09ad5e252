"""Permutation nulls: determinism, the add-one p-value, quantile
conventions, and distributional sanity on null data."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from bfdr.bayes_factor import DEFAULT_OMEGA_GRID, GeneDesign, gene_log_bf
from bfdr.fdr_control import two_sided_normal_p
from bfdr.permutation import (
    PermutationPlan,
    Statistic,
    empirical_quantile,
    min_p_statistic,
    permutation_pvalue,
    permute_null_quantile,
    permuted_statistics,
)


def _null_gene(seed=0, n=40, k=4):
    rng = np.random.default_rng(seed)
    G = rng.binomial(2, 0.3, size=(n, k)).astype(np.int8)
    y = rng.normal(size=n)
    return y, G


class TestPlan:
    def test_valid(self):
        plan = PermutationPlan(n_perms=10, seed=3)
        assert plan.statistic is Statistic.GENE_BF

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_n_perms_validation(self, bad):
        with pytest.raises(ValueError):
            PermutationPlan(n_perms=bad, seed=0)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            PermutationPlan(n_perms=1, seed=2**64)

    def test_statistic_type(self):
        with pytest.raises(ValueError):
            PermutationPlan(n_perms=1, seed=0, statistic="gene_bf")


class TestEmpiricalQuantile:
    def test_odd_count_median(self):
        assert empirical_quantile(np.arange(1.0, 102.0), 0.5) == 51.0

    def test_even_count_median(self):
        # ceil(0.5 * 100) = 50: the lower middle value.
        assert empirical_quantile(np.arange(1.0, 101.0), 0.5) == 50.0

    def test_small_gamma_clamps_to_minimum(self):
        vals = np.arange(10.0, 0.0, -1.0)
        assert empirical_quantile(vals, 0.01) == 1.0

    def test_near_one_gamma(self):
        assert empirical_quantile([3.0, 1.0, 2.0], 0.99) == 3.0

    def test_validation(self):
        with pytest.raises(ValueError):
            empirical_quantile([], 0.5)
        with pytest.raises(ValueError):
            empirical_quantile([1.0], 1.0)


class TestMinP:
    def test_matches_per_variant_pvalues(self):
        y, G = _null_gene(seed=5)
        design = GeneDesign(G, sigma=1.0, grid=None)
        z = design.z_batch(y)[:, 0]
        expected = min(two_sided_normal_p(float(zi)) for zi in z)
        assert min_p_statistic(y, G, sigma=1.0) == pytest.approx(expected, rel=1e-12)


class TestDeterminism:
    def test_same_inputs_bit_identical(self):
        y, G = _null_gene()
        plan = PermutationPlan(n_perms=25, seed=11)
        a = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "gene7")
        b = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "gene7")
        np.testing.assert_array_equal(a, b)

    def test_different_test_id_different_draws(self):
        y, G = _null_gene()
        plan = PermutationPlan(n_perms=25, seed=11)
        a = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "gene7")
        b = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "gene8")
        assert not np.array_equal(a, b)

    def test_different_seed_different_draws(self):
        y, G = _null_gene()
        a = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, PermutationPlan(10, 1), "g")
        b = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, PermutationPlan(10, 2), "g")
        assert not np.array_equal(a, b)

    def test_per_test_streams_do_not_depend_on_visit_order(self):
        y, G = _null_gene()
        plan = PermutationPlan(n_perms=10, seed=4)
        forward = {
            tid: permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, tid)
            for tid in ("a", "b", "c")
        }
        backward = {
            tid: permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, tid)
            for tid in ("c", "b", "a")
        }
        for tid in ("a", "b", "c"):
            np.testing.assert_array_equal(forward[tid], backward[tid])

    def test_quantile_consistent_with_statistics(self):
        y, G = _null_gene(seed=3)
        plan = PermutationPlan(n_perms=39, seed=21)
        log_stats = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g")
        q = permute_null_quantile(y, G, 1.0, DEFAULT_OMEGA_GRID, 0.5, plan, "g")
        assert q == pytest.approx(math.exp(empirical_quantile(log_stats, 0.5)), rel=1e-14)


class TestPvalue:
    def test_observed_beats_all_permutations(self):
        y, G = _null_gene(seed=9)
        plan = PermutationPlan(n_perms=99, seed=5)
        p = permutation_pvalue(1e12, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g")
        assert p == pytest.approx(1 / 100, abs=0)

    def test_observed_weaker_than_all(self):
        y, G = _null_gene(seed=9)
        plan = PermutationPlan(n_perms=99, seed=5)
        p = permutation_pvalue(1e-12, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g")
        assert p == 1.0

    def test_bounds(self):
        y, G = _null_gene(seed=2)
        plan = PermutationPlan(n_perms=19, seed=8)
        obs = math.exp(gene_log_bf(y, G, sigma=1.0))
        p = permutation_pvalue(obs, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g")
        assert 1 / 20 <= p <= 1.0

    def test_min_p_orientation(self):
        # For the min-p statistic smaller observed values are more extreme.
        y, G = _null_gene(seed=13)
        plan = PermutationPlan(n_perms=49, seed=3, statistic=Statistic.MIN_P)
        assert permutation_pvalue(0.0, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g") == 1 / 50
        assert permutation_pvalue(1.0, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g") == 1.0

    def test_null_pvalues_roughly_uniform(self):
        # On null data with 19 permutations the add-one p-value lives on the
        # lattice {1/20, ..., 20/20} and should be close to uniform on it.
        plan = PermutationPlan(n_perms=19, seed=17)
        counts = np.zeros(20, dtype=int)
        n_genes = 300
        rng = np.random.default_rng(23)
        for i in range(n_genes):
            G = rng.binomial(2, 0.3, size=(30, 3)).astype(np.int8)
            if not np.any(G.std(axis=0) > 0):
                continue
            y = rng.normal(size=30)
            obs = math.exp(gene_log_bf(y, G, sigma=1.0))
            p = permutation_pvalue(obs, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, f"g{i}")
            counts[round(p * 20) - 1] += 1
        gof = stats.chisquare(counts)
        assert gof.pvalue > 0.001


class TestQuantile:
    def test_requires_gene_bf_plan(self):
        y, G = _null_gene()
        plan = PermutationPlan(n_perms=9, seed=0, statistic=Statistic.MIN_P)
        with pytest.raises(ValueError, match="gene Bayes factor"):
            permute_null_quantile(y, G, 1.0, DEFAULT_OMEGA_GRID, 0.5, plan)

    def test_quantile_needs_enough_permutations(self):
        y, G = _null_gene()
        plan = PermutationPlan(n_perms=9, seed=0)
        with pytest.raises(ValueError, match="n_perms"):
            permute_null_quantile(y, G, 1.0, DEFAULT_OMEGA_GRID, 0.05, plan)

    def test_median_quantile_more_stable_than_tail_pvalue(self):
        # The point of quantile-based null calibration: with a fixed budget
        # of 100 permutations, the median of the permutation null varies far
        # less across reruns than a p-value pinned near 0.01.
        y, G = _null_gene(seed=31, n=60, k=5)
        ref_plan = PermutationPlan(n_perms=4999, seed=999)
        ref = permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, ref_plan, "ref")
        obs = float(np.exp(np.quantile(ref, 0.99)))  # a true p near 0.01

        quantiles = []
        pvalues = []
        for seed in range(20):
            plan = PermutationPlan(n_perms=100, seed=seed)
            quantiles.append(permute_null_quantile(y, G, 1.0, DEFAULT_OMEGA_GRID, 0.5, plan, "g"))
            pvalues.append(permutation_pvalue(obs, y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g"))
        cv_q = np.std(quantiles) / np.mean(quantiles)
        cv_p = np.std(pvalues) / np.mean(pvalues)
        assert cv_q < cv_p


class TestDegenerateInputs:
    def test_constant_gene_rejected(self):
        y = np.random.default_rng(0).normal(size=20)
        G = np.ones((20, 2), dtype=np.int8)
        plan = PermutationPlan(n_perms=5, seed=0)
        with pytest.raises(ValueError, match="constant"):
            permuted_statistics(y, G, 1.0, DEFAULT_OMEGA_GRID, plan, "g")

    def test_y_must_be_1d(self):
        G = np.random.default_rng(1).binomial(2, 0.4, size=(10, 2)).astype(np.int8)
        plan = PermutationPlan(n_perms=5, seed=0)
        with pytest.raises(ValueError, match="1-d"):
            permuted_statistics(np.zeros((10, 2)), G, 1.0, DEFAULT_OMEGA_GRID, plan, "g")
