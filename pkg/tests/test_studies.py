"""Study runners: all arms present, scores consistent with their parts,
and worker-count independence of every reported result."""
from __future__ import annotations

import numpy as np

from bfdr.fdr_control import bfdr_decide, posterior_table
from bfdr.permutation import PermutationPlan
from bfdr.pi0_estimation import ebf_pi0
from bfdr.simulation import SimIConfig, SimIIConfig, simulate_I, simulate_II
from bfdr.studies import analyze_genes, analyze_study_i, map_parallel, run_study_i, run_study_ii


def _square(x):
    return x * x


class TestMapParallel:
    def test_preserves_order_and_values(self):
        items = list(range(37))
        seq = map_parallel(_square, items, threads=1)
        par = map_parallel(_square, items, threads=3)
        assert seq == par == [x * x for x in items]

    def test_single_item_stays_sequential(self):
        assert map_parallel(_square, [4], threads=8) == [16]


class TestStudyI:
    def test_all_arms_present_and_consistent(self):
        result = run_study_i(SimIConfig(m=400, n=60, pi0=0.5, seed=14))
        assert set(result.results) == {"ebf", "qbf", "bh", "storey"}
        assert result.n_tests == 400
        for arm in result.results.values():
            assert 0.0 <= arm.pi0_hat <= 1.0
            assert arm.eval.n_rejected == len(arm.rejected)
            assert arm.seconds >= 0.0
        assert result["bh"].pi0_hat == 1.0

    def test_ebf_arm_matches_manual_pipeline(self):
        records, truth = simulate_I(SimIConfig(m=300, n=50, pi0=0.4, seed=3))
        result = analyze_study_i(records, truth)
        est = ebf_pi0([r.bf for r in records])
        report = bfdr_decide(posterior_table(records, est), alpha=0.05)
        assert result["ebf"].pi0_hat == est.pi0_hat
        assert result["ebf"].rejected == report.rejected

    def test_requires_z_and_se(self):
        records, truth = simulate_I(SimIConfig(m=10, n=20, seed=0))
        stripped = [r.__class__(r.id, r.bf) for r in records]
        try:
            analyze_study_i(stripped, truth)
        except ValueError as err:
            assert "z and se" in str(err)
        else:
            raise AssertionError("expected ValueError")


class TestStudyII:
    @staticmethod
    def _tiny_study(threads, perm_p=0, n_perms=30):
        genes, truth = simulate_II(SimIIConfig(m=40, n=45, k_range=(5, 12), pi0=0.6, seed=20))
        return run_study_ii(
            genes,
            truth,
            sigma=1.0,
            n_perms=n_perms,
            perm_seed=77,
            threads=threads,
            perm_p=perm_p,
        )

    def test_default_arms(self):
        result = self._tiny_study(threads=1)
        assert set(result.results) == {"ebf", "qbf"}
        assert result.perm_pvalues is None
        assert len(result.records) == 40
        assert result.quantiles.shape == (40,)
        assert np.all(result.quantiles > 0)

    def test_perm_p_adds_frequentist_arms(self):
        result = self._tiny_study(threads=1, perm_p=19)
        assert set(result.results) == {"ebf", "qbf", "bh", "storey"}
        pvals = dict(result.perm_pvalues)
        assert len(pvals) == 40
        assert all(1 / 20 <= p <= 1.0 for p in pvals.values())

    def test_worker_count_never_changes_results(self):
        a = self._tiny_study(threads=1, perm_p=19)
        b = self._tiny_study(threads=3, perm_p=19)
        assert a.records == b.records
        np.testing.assert_array_equal(a.quantiles, b.quantiles)
        assert a.perm_pvalues == b.perm_pvalues
        for method in a.results:
            assert a[method].pi0_hat == b[method].pi0_hat
            assert a[method].rejected == b[method].rejected
            assert a[method].eval == b[method].eval

    def test_analyze_genes_matches_direct_permutation_calls(self):
        genes, _ = simulate_II(SimIIConfig(m=5, n=40, k_range=(4, 8), seed=31))
        plan = PermutationPlan(n_perms=39, seed=5)
        from bfdr.bayes_factor import DEFAULT_OMEGA_GRID, gene_log_bf
        from bfdr.permutation import permute_null_quantile

        analysis = analyze_genes(genes, 1.0, DEFAULT_OMEGA_GRID, 0.5, plan, threads=1)
        for i, gene in enumerate(genes):
            assert analysis.records[i].log_bf == gene_log_bf(gene.y, gene.G, 1.0)
            assert analysis.quantiles[i] == permute_null_quantile(
                gene.y, gene.G, 1.0, DEFAULT_OMEGA_GRID, 0.5, plan, gene.id
            )
