"""End-to-end study runners shared by the command line and the test rig.

A study runs one simulated dataset through every competing procedure and
scores each against the generating truth. Study I tests are independent,
so the quantile side of QBF is available in closed form; study II works
at gene level, where QBF's null quantiles come from the permutation
engine, fanned out over a process pool when requested. All pool work is
per-test and substream-seeded, so the worker count never changes any
result, only the wall clock.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .bayes_factor import (
    DEFAULT_OMEGA_GRID,
    GeneDesign,
    OmegaGrid,
    bf_null_quantiles,
)
from .fdr_control import (
    apply_auto_reject,
    bfdr_decide,
    bh_decide,
    posterior_table,
    storey_decide,
    two_sided_normal_p,
)
from .model import EvalReport, SimTruth, TestRecord
from .permutation import PermutationPlan, Statistic, permutation_pvalue, permute_null_quantile
from .pi0_estimation import ebf_pi0, qbf_pi0
from .simulation import GeneData, SimIConfig, score, simulate_I

__all__ = [
    "MethodResult",
    "StudyResult",
    "map_parallel",
    "analyze_study_i",
    "run_study_i",
    "analyze_genes",
    "run_study_ii",
]


@dataclass(frozen=True)
class MethodResult:
    """One procedure's outcome on one dataset."""

    method: str
    pi0_hat: float
    rejected: frozenset[str]
    eval: EvalReport
    seconds: float


@dataclass(frozen=True)
class StudyResult:
    """All procedures' outcomes on one dataset."""

    results: dict[str, MethodResult]
    n_tests: int

    def __getitem__(self, method: str) -> MethodResult:
        return self.results[method]


def map_parallel(fn: Callable, items: Sequence, threads: int) -> list:
    """Map a picklable function over items, optionally on a process pool.

    Results come back in input order whatever the worker count, and
    ``threads <= 1`` bypasses the pool entirely, so both paths produce
    identical output.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def run_study_i(
    config: SimIConfig,
    alpha: float = 0.05,
    gamma: float = 0.5,
    grid: OmegaGrid = DEFAULT_OMEGA_GRID,
) -> StudyResult:
    """Generate one study-I dataset and run all four procedures on it."""
    records, truth = simulate_I(config, grid)
    return analyze_study_i(records, truth, alpha, gamma, grid)


def analyze_study_i(
    records: Sequence[TestRecord],
    truth: SimTruth,
    alpha: float = 0.05,
    gamma: float = 0.5,
    grid: OmegaGrid = DEFAULT_OMEGA_GRID,
) -> StudyResult:
    """Run all four procedures on independent per-test records.

    The records must carry z and se (study-I records do); QBF's null
    quantiles come from the known-null-law closed form and the p-value
    baselines from the two-sided normal law of z.
    """
    if any(r.z is None or r.se is None for r in records):
        raise ValueError("study-I analysis needs z and se on every record")
    bfs = np.array([r.bf for r in records])
    ses = np.array([r.se for r in records])
    zs = np.array([r.z for r in records])
    pvals = list(zip((r.id for r in records), two_sided_normal_p(zs).tolist()))
    results: dict[str, MethodResult] = {}

    t0 = time.perf_counter()
    est = ebf_pi0(bfs)
    report = apply_auto_reject(bfdr_decide(posterior_table(records, est), alpha), records)
    results["ebf"] = MethodResult(
        "ebf", est.pi0_hat, report.rejected, score(report, truth), time.perf_counter() - t0
    )

    t0 = time.perf_counter()
    quantiles = bf_null_quantiles(ses, gamma, grid)
    est = qbf_pi0(bfs, quantiles, gamma)
    report = bfdr_decide(posterior_table(records, est), alpha)
    results["qbf"] = MethodResult(
        "qbf", est.pi0_hat, report.rejected, score(report, truth), time.perf_counter() - t0
    )

    t0 = time.perf_counter()
    decision = bh_decide(pvals, alpha)
    results["bh"] = MethodResult(
        "bh", 1.0, decision.rejected, score(decision, truth), time.perf_counter() - t0
    )

    t0 = time.perf_counter()
    decision = storey_decide(pvals, gamma, alpha)
    results["storey"] = MethodResult(
        "storey",
        decision.pi0.pi0_hat,
        decision.rejected,
        score(decision, truth),
        time.perf_counter() - t0,
    )
    return StudyResult(results=results, n_tests=len(records))


def _observed_log_bf_task(gene: GeneData, sigma: float, omegas: tuple[float, ...]) -> float:
    design = GeneDesign(gene.G, sigma, OmegaGrid(omegas))
    return float(design.log_gene_bf(gene.y)[0])


def _quantile_task(
    gene: GeneData,
    sigma: float,
    omegas: tuple[float, ...],
    gamma: float,
    plan: PermutationPlan,
) -> float:
    return permute_null_quantile(gene.y, gene.G, sigma, OmegaGrid(omegas), gamma, plan, gene.id)


def _pvalue_task(
    gene_and_bf: tuple[GeneData, float],
    sigma: float,
    omegas: tuple[float, ...],
    plan: PermutationPlan,
) -> float:
    gene, observed = gene_and_bf
    return permutation_pvalue(observed, gene.y, gene.G, sigma, OmegaGrid(omegas), plan, gene.id)


@dataclass(frozen=True)
class GeneAnalysis:
    """Observed gene records plus the permutation products behind them."""

    records: tuple[TestRecord, ...]
    quantiles: np.ndarray
    seconds_records: float
    seconds_quantiles: float


def analyze_genes(
    genes: Sequence[GeneData],
    sigma: float,
    grid: OmegaGrid,
    gamma: float,
    plan: PermutationPlan,
    threads: int = 1,
) -> GeneAnalysis:
    """Observed gene Bayes factors and permutation null quantiles."""
    omegas = grid.omegas
    t0 = time.perf_counter()
    log_bfs = map_parallel(partial(_observed_log_bf_task, sigma=sigma, omegas=omegas), genes, threads)
    records = tuple(TestRecord.from_log_bf(g.id, lb) for g, lb in zip(genes, log_bfs))
    t_records = time.perf_counter() - t0
    t0 = time.perf_counter()
    quantiles = np.array(
        map_parallel(
            partial(_quantile_task, sigma=sigma, omegas=omegas, gamma=gamma, plan=plan),
            genes,
            threads,
        )
    )
    t_quantiles = time.perf_counter() - t0
    return GeneAnalysis(
        records=records,
        quantiles=quantiles,
        seconds_records=t_records,
        seconds_quantiles=t_quantiles,
    )


@dataclass(frozen=True)
class StudyIIResult:
    """Study-II outcomes plus the intermediate products needed to audit them."""

    results: dict[str, MethodResult]
    records: tuple[TestRecord, ...]
    quantiles: np.ndarray
    perm_pvalues: tuple[tuple[str, float], ...] | None
    n_tests: int

    def __getitem__(self, method: str) -> MethodResult:
        return self.results[method]


def run_study_ii(
    genes: Sequence[GeneData],
    truth: SimTruth,
    sigma: float,
    alpha: float = 0.05,
    gamma: float = 0.5,
    n_perms: int = 100,
    perm_seed: int = 0,
    threads: int = 1,
    grid: OmegaGrid = DEFAULT_OMEGA_GRID,
    perm_p: int = 0,
) -> StudyIIResult:
    """Analyze generated study-II genes with EBF and permutation-backed QBF.

    ``perm_p`` > 0 adds the frequentist arm: permutation p-values at that
    permutation count, fed to the step-up and q-value procedures. Timing
    for each arm includes the shared observed-Bayes-factor scan, since no
    arm can run without it.
    """
    plan = PermutationPlan(n_perms=n_perms, seed=perm_seed, statistic=Statistic.GENE_BF)
    analysis = analyze_genes(genes, sigma, grid, gamma, plan, threads)
    records = list(analysis.records)
    bfs = np.array([r.bf for r in records])
    results: dict[str, MethodResult] = {}

    t0 = time.perf_counter()
    est = ebf_pi0(bfs)
    report = apply_auto_reject(bfdr_decide(posterior_table(records, est), alpha), records)
    results["ebf"] = MethodResult(
        "ebf",
        est.pi0_hat,
        report.rejected,
        score(report, truth),
        analysis.seconds_records + (time.perf_counter() - t0),
    )

    t0 = time.perf_counter()
    est = qbf_pi0(bfs, analysis.quantiles, gamma)
    report = bfdr_decide(posterior_table(records, est), alpha)
    results["qbf"] = MethodResult(
        "qbf",
        est.pi0_hat,
        report.rejected,
        score(report, truth),
        analysis.seconds_records + analysis.seconds_quantiles + (time.perf_counter() - t0),
    )

    perm_pvalues = None
    if perm_p > 0:
        p_plan = PermutationPlan(n_perms=perm_p, seed=perm_seed, statistic=Statistic.GENE_BF)
        t0 = time.perf_counter()
        pvals = map_parallel(
            partial(_pvalue_task, sigma=sigma, omegas=grid.omegas, plan=p_plan),
            list(zip(genes, bfs.tolist())),
            threads,
        )
        perm_pvalues = tuple(zip((g.id for g in genes), pvals))
        t_perm = time.perf_counter() - t0

        t0 = time.perf_counter()
        decision = bh_decide(perm_pvalues, alpha)
        results["bh"] = MethodResult(
            "bh",
            1.0,
            decision.rejected,
            score(decision, truth),
            analysis.seconds_records + t_perm + (time.perf_counter() - t0),
        )
        t0 = time.perf_counter()
        decision = storey_decide(perm_pvalues, gamma, alpha)
        results["storey"] = MethodResult(
            "storey",
            decision.pi0.pi0_hat,
            decision.rejected,
            score(decision, truth),
            analysis.seconds_records + t_perm + (time.perf_counter() - t0),
        )

    return StudyIIResult(
        results=results,
        records=analysis.records,
        quantiles=analysis.quantiles,
        perm_pvalues=perm_pvalues,
        n_tests=len(records),
    )
