"""Command-line frontend: TSV in, TSV out.

Three subcommands:

* ``bf``   compute Bayes factors from (z, se) summaries or raw data files
* ``fdr``  estimate the null proportion and decide at a target FDR
* ``sim``  run a synthetic study end to end and score every procedure

Input tables are tab-separated with a mandatory header line; lines
starting with ``#`` are comments. Machine outputs keep full float
precision; the terminal summary rounds to six significant digits. Output
files are written to a temp file and renamed into place, so a failing run
never leaves a partial file. Exit codes: 0 on success, 2 for usage or
input problems, 3 for numerical failures during computation.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .bayes_factor import (
    DEFAULT_OMEGA_GRID,
    OmegaGrid,
    bf_from_regression,
    gene_log_bf,
    log_bf_averaged_many,
)
from .fdr_control import (
    apply_auto_reject,
    bfdr_decide,
    bh_decide,
    posterior_table,
    storey_decide,
    two_sided_normal_p,
)
from .model import TestRecord
from .permutation import PermutationPlan, Statistic
from .pi0_estimation import ebf_pi0, qbf_pi0
from .rng import derive_seed
from .simulation import GeneData, SimIConfig, SimIIConfig, simulate_I, simulate_II
from .studies import MethodResult, analyze_genes, analyze_study_i, run_study_ii

__all__ = ["main", "UsageError"]

SEED_ENV_VAR = "BFDR_SEED"
_NA = "NA"


class UsageError(Exception):
    """Bad flags or bad input files; maps to exit code 2."""


# ---------------------------------------------------------------------------
# formatting and file helpers


def _full(x) -> str:
    """Full-precision machine formatting (floats survive a round trip)."""
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return _NA
    return str(x)


def _human(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def write_tsv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    comments: Sequence[tuple[str, object]] = (),
) -> None:
    """Write a commented TSV atomically (write to temp, rename into place)."""
    lines = [f"# {k}\t{_full(v)}" for k, v in comments]
    lines.append("\t".join(header))
    for row in rows:
        lines.append("\t".join(_full(v) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_table(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Parse a TSV into (header, [(line_number, fields), ...]).

    Skips comment (leading ``#``) and blank lines. Every data line must
    have exactly as many fields as the header.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    header: list[str] | None = None
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if header is None:
            header = [f.strip() for f in fields]
            continue
        if len(fields) != len(header):
            raise UsageError(
                f"{path}:{lineno}: expected {len(header)} fields, found {len(fields)}"
            )
        rows.append((lineno, fields))
    if header is None:
        raise UsageError(f"{path}: empty table (no header line)")
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return header, rows


def _column_index(header: Sequence[str], name: str, path: Path, required: bool = True) -> int | None:
    try:
        return header.index(name)
    except ValueError:
        if required:
            raise UsageError(f"{path}: missing required column {name!r}") from None
        return None


def _parse_float(text: str, path: Path, lineno: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{path}:{lineno}: column {column!r}: cannot parse {text!r} as a number") from None


def _parse_opt_float(text: str, path: Path, lineno: int, column: str) -> float | None:
    if text.strip() in (_NA, "", "nan"):
        return None
    return _parse_float(text, path, lineno, column)


def _parse_float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise UsageError(f"{flag}: cannot parse {text!r} as comma-separated numbers") from None
    if not values:
        raise UsageError(f"{flag}: empty list")
    return values


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    values = _parse_float_list(text, flag)
    if len(values) != 2:
        raise UsageError(f"{flag}: expected low,high")
    return values[0], values[1]


def _grid_from(args) -> OmegaGrid:
    if args.omega_grid is None:
        return DEFAULT_OMEGA_GRID
    try:
        return OmegaGrid(_parse_float_list(args.omega_grid, "--omega-grid"))
    except ValueError as exc:
        raise UsageError(f"--omega-grid: {exc}") from exc


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {SEED_ENV_VAR}={raw!r} is not an integer") from None


def _records_from_table(
    header: Sequence[str], rows: Sequence[tuple[int, Sequence[str]]], path: Path
) -> list[TestRecord]:
    """Build test records from a table with id and bf (or log_bf) columns."""
    i_id = _column_index(header, "id", path)
    i_bf = _column_index(header, "bf", path, required=False)
    i_lbf = _column_index(header, "log_bf", path, required=False)
    if i_bf is None and i_lbf is None:
        raise UsageError(f"{path}: need a 'bf' or 'log_bf' column")
    i_z = _column_index(header, "z", path, required=False)
    i_se = _column_index(header, "se", path, required=False)
    records = []
    seen: set[str] = set()
    for lineno, fields in rows:
        rid = fields[i_id].strip()
        if rid in seen:
            raise UsageError(f"{path}:{lineno}: duplicate id {rid!r}")
        seen.add(rid)
        z = _parse_opt_float(fields[i_z], path, lineno, "z") if i_z is not None else None
        se = _parse_opt_float(fields[i_se], path, lineno, "se") if i_se is not None else None
        try:
            if i_lbf is not None:
                lbf = _parse_float(fields[i_lbf], path, lineno, "log_bf")
                if i_bf is not None:
                    bf = _parse_float(fields[i_bf], path, lineno, "bf")
                    rec = TestRecord(rid, bf, z=z, se=se, log_bf=lbf)
                else:
                    rec = TestRecord.from_log_bf(rid, lbf, z=z, se=se)
            else:
                bf = _parse_float(fields[i_bf], path, lineno, "bf")
                rec = TestRecord(rid, bf, z=z, se=se)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from exc
        records.append(rec)
    return records


def _load_vector(path: Path) -> np.ndarray:
    try:
        arr = np.loadtxt(path, dtype=float)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: cannot parse numeric data: {exc}") from exc
    return np.atleast_1d(arr)


def _load_matrix(path: Path) -> np.ndarray:
    try:
        arr = np.loadtxt(path, dtype=float, ndmin=2)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: cannot parse numeric data: {exc}") from exc
    return arr


def _genes_from_table(
    header: Sequence[str], rows: Sequence[tuple[int, Sequence[str]]], path: Path
) -> list[GeneData]:
    i_id = _column_index(header, "id", path)
    i_y = _column_index(header, "y_file", path)
    i_g = _column_index(header, "g_file", path)
    base = Path(path).parent
    genes = []
    seen: set[str] = set()
    for lineno, fields in rows:
        rid = fields[i_id].strip()
        if rid in seen:
            raise UsageError(f"{path}:{lineno}: duplicate id {rid!r}")
        seen.add(rid)
        y = _load_vector(base / fields[i_y].strip())
        G = _load_matrix(base / fields[i_g].strip())
        if G.shape[0] != y.size:
            raise UsageError(
                f"{path}:{lineno}: {rid}: y has {y.size} rows but G has {G.shape[0]}"
            )
        genes.append(GeneData(id=rid, y=y, G=G))
    return genes


# ---------------------------------------------------------------------------
# bf subcommand


def cmd_bf(args) -> None:
    grid = _grid_from(args)
    in_path = Path(args.input)
    out_path = Path(args.output)
    header, rows = read_table(in_path)

    if "z" in header and "se" in header:
        i_id = _column_index(header, "id", in_path)
        i_z = _column_index(header, "z", in_path)
        i_se = _column_index(header, "se", in_path)
        ids, zs, ses = [], [], []
        for lineno, fields in rows:
            ids.append(fields[i_id].strip())
            zs.append(_parse_float(fields[i_z], in_path, lineno, "z"))
            ses.append(_parse_float(fields[i_se], in_path, lineno, "se"))
        log_bfs = log_bf_averaged_many(np.array(zs), np.array(ses), grid)
        out_rows = [
            (i, z, se, lb, TestRecord.from_log_bf(i, lb).bf)
            for i, z, se, lb in zip(ids, zs, ses, (float(v) for v in log_bfs))
        ]
    elif "y_file" in header and "g_file" in header:
        if args.sigma is None and not args.estimate_sigma:
            raise UsageError("raw-data input needs --sigma (or --estimate-sigma)")
        genes = _genes_from_table(header, rows, in_path)
        out_rows = []
        for gene in genes:
            if gene.G.shape[1] == 1:
                res = bf_from_regression(
                    gene.y,
                    gene.G[:, 0],
                    sigma=args.sigma if args.sigma is not None else 1.0,
                    grid=grid,
                    estimate_sigma=args.estimate_sigma,
                )
                lb = float(log_bf_averaged_many(np.array(res.z), np.array(res.se), grid))
                out_rows.append((gene.id, res.z, res.se, lb, res.bf))
            else:
                if args.sigma is None:
                    raise UsageError("gene-level input (multi-column g_file) needs --sigma")
                lb = gene_log_bf(gene.y, gene.G, args.sigma, grid)
                out_rows.append((gene.id, None, None, lb, TestRecord.from_log_bf(gene.id, lb).bf))
    else:
        raise UsageError(f"{in_path}: need columns (id, z, se) or (id, y_file, g_file)")

    comments = [("omega_grid", ",".join(repr(w) for w in grid.omegas)), ("m", len(out_rows))]
    write_tsv(out_path, ["id", "z", "se", "log_bf", "bf"], out_rows, comments)
    if args.json:
        doc = {
            "omega_grid": list(grid.omegas),
            "tests": [
                {"id": r[0], "z": r[1], "se": r[2], "log_bf": r[3], "bf": r[4]} for r in out_rows
            ],
        }
        _atomic_write_text(out_path.with_suffix(out_path.suffix + ".json"), json.dumps(doc, indent=2) + "\n")
    print(f"wrote {len(out_rows)} Bayes factors to {out_path}")


# ---------------------------------------------------------------------------
# fdr subcommand


def _decide_posterior(records, est, alpha, auto: bool):
    table = posterior_table(records, est)
    report = bfdr_decide(table, alpha)
    if auto:
        report = apply_auto_reject(report, records)
    vhat = dict(table.entries)
    return report, vhat


def _fdr_bayes_output(args, records, est, report, vhat, out_path, extra_comments=()):
    comments = [
        ("method", args.method),
        ("alpha", args.alpha),
        ("m", est.m),
        ("pi0_hat", est.pi0_hat),
    ]
    comments += list(extra_comments)
    if est.pi0_hat == 0.0:
        comments.append(
            ("note", "pi0_hat is 0 (no evidence of a null fraction); every posterior is 1")
        )
    comments += [
        ("threshold", report.threshold),
        ("n_rejected", report.n_rejected),
        ("estimated_bfdr", report.estimated_bfdr),
        ("n_auto_rejected", len(report.auto_rejected)),
    ]
    rows = [
        (
            r.id,
            r.bf,
            vhat[r.id],
            int(r.id in report.rejected),
            int(r.id in report.auto_rejected),
        )
        for r in records
    ]
    write_tsv(out_path, ["id", "bf", "v_hat", "rejected", "auto"], rows, comments)
    if args.json:
        doc = {
            "method": args.method,
            "alpha": args.alpha,
            "m": est.m,
            "pi0_hat": est.pi0_hat,
            "gamma": est.gamma,
            "d0": est.d0,
            "threshold": report.threshold,
            "n_rejected": report.n_rejected,
            "estimated_bfdr": report.estimated_bfdr,
            "auto_rejected": sorted(report.auto_rejected),
            "tests": [
                {
                    "id": r.id,
                    "bf": r.bf,
                    "v_hat": vhat[r.id],
                    "rejected": r.id in report.rejected,
                    "auto": r.id in report.auto_rejected,
                }
                for r in records
            ],
        }
        _atomic_write_text(out_path.with_suffix(out_path.suffix + ".json"), json.dumps(doc, indent=2) + "\n")
    print(
        f"{args.method}: m={est.m} pi0_hat={_human(est.pi0_hat)} "
        f"threshold={_human(report.threshold)} rejected={report.n_rejected} "
        f"estimated_bfdr={_human(report.estimated_bfdr)}"
    )


def _fdr_pvalue_output(args, decision, pvals, out_path):
    pi0_hat = decision.pi0.pi0_hat if decision.pi0 is not None else 1.0
    comments = [
        ("method", args.method),
        ("alpha", args.alpha),
        ("m", len(pvals)),
        ("pi0_hat", pi0_hat),
    ]
    if args.method == "storey":
        comments.append(("gamma", args.gamma))
    comments += [
        ("p_cutoff", decision.p_cutoff),
        ("n_rejected", decision.n_rejected),
    ]
    qmap = dict(decision.qvalues)
    rows = [(i, p, qmap[i], int(i in decision.rejected)) for i, p in pvals]
    write_tsv(out_path, ["id", "p", "q", "rejected"], rows, comments)
    if args.json:
        doc = {
            "method": args.method,
            "alpha": args.alpha,
            "m": len(pvals),
            "pi0_hat": pi0_hat,
            "p_cutoff": decision.p_cutoff,
            "n_rejected": decision.n_rejected,
            "tests": [
                {"id": i, "p": p, "q": qmap[i], "rejected": i in decision.rejected}
                for i, p in pvals
            ],
        }
        _atomic_write_text(out_path.with_suffix(out_path.suffix + ".json"), json.dumps(doc, indent=2) + "\n")
    print(
        f"{args.method}: m={len(pvals)} pi0_hat={_human(pi0_hat)} "
        f"p_cutoff={_human(decision.p_cutoff)} rejected={decision.n_rejected}"
    )


def cmd_fdr(args) -> None:
    in_path = Path(args.input)
    out_path = Path(args.output)
    header, rows = read_table(in_path)
    grid = _grid_from(args)

    if args.method == "ebf":
        records = _records_from_table(header, rows, in_path)
        est = ebf_pi0([r.bf for r in records])
        report, vhat = _decide_posterior(records, est, args.alpha, auto=True)
        _fdr_bayes_output(args, records, est, report, vhat, out_path, [("d0", est.d0)])

    elif args.method == "qbf":
        if "null_q" in header:
            records = _records_from_table(header, rows, in_path)
            i_q = _column_index(header, "null_q", in_path)
            quantiles = [
                _parse_float(fields[i_q], in_path, lineno, "null_q") for lineno, fields in rows
            ]
        elif "y_file" in header and "g_file" in header:
            if args.perms < 1:
                raise UsageError("qbf from raw data needs --perms >= 1")
            if args.sigma is None:
                raise UsageError("qbf from raw data needs --sigma")
            genes = _genes_from_table(header, rows, in_path)
            plan = PermutationPlan(args.perms, args.seed, Statistic.GENE_BF)
            analysis = analyze_genes(genes, args.sigma, grid, args.gamma, plan, args.threads)
            records = list(analysis.records)
            quantiles = analysis.quantiles
        else:
            raise UsageError(
                "qbf needs a 'null_q' column, or raw-data columns (id, y_file, g_file) "
                "with --perms and --sigma"
            )
        est = qbf_pi0([r.bf for r in records], quantiles, args.gamma)
        report, vhat = _decide_posterior(records, est, args.alpha, auto=False)
        _fdr_bayes_output(args, records, est, report, vhat, out_path, [("gamma", args.gamma)])

    else:  # bh / storey
        i_id = _column_index(header, "id", in_path)
        i_p = _column_index(header, "p", in_path, required=False)
        pvals = []
        if i_p is not None:
            for lineno, fields in rows:
                pvals.append(
                    (fields[i_id].strip(), _parse_float(fields[i_p], in_path, lineno, "p"))
                )
        else:
            i_z = _column_index(header, "z", in_path, required=False)
            if i_z is None:
                raise UsageError(f"{in_path}: {args.method} needs a 'p' column (or 'z' to derive one)")
            for lineno, fields in rows:
                z = _parse_float(fields[i_z], in_path, lineno, "z")
                pvals.append((fields[i_id].strip(), two_sided_normal_p(z)))
        if args.method == "bh":
            decision = bh_decide(pvals, args.alpha)
        else:
            decision = storey_decide(pvals, args.gamma, args.alpha)
        _fdr_pvalue_output(args, decision, pvals, out_path)


# ---------------------------------------------------------------------------
# sim subcommand


def _write_sim_records(out_dir: Path, records, truth, quantiles=None) -> None:
    rows = []
    for idx, r in enumerate(records):
        row = [r.id, r.z, r.se, r.log_bf, r.bf]
        if quantiles is not None:
            row.append(float(quantiles[idx]))
        rows.append(row)
    header = ["id", "z", "se", "log_bf", "bf"] + (["null_q"] if quantiles is not None else [])
    write_tsv(out_dir / "records.tsv", header, rows)
    write_tsv(
        out_dir / "truth.tsv",
        ["id", "true_alt"],
        [(i, z) for i, z in zip(truth.ids, truth.z)],
    )


def _aggregate(per_run: list[dict]) -> list[dict]:
    """Collapse per-(pi0, rep, method) rows to per-(pi0, method) summaries."""
    keys = sorted({(row["pi0"], row["method"]) for row in per_run})
    out = []
    for pi0, method in keys:
        sel = [r for r in per_run if r["pi0"] == pi0 and r["method"] == method]
        agg = {"pi0": pi0, "method": method, "reps": len(sel)}
        for fieldname in ("pi0_hat", "fdp", "fnp", "n_rejected"):
            values = [r[fieldname] for r in sel]
            agg[f"mean_{fieldname}"] = sum(values) / len(values)
            agg[f"min_{fieldname}"] = min(values)
            agg[f"max_{fieldname}"] = max(values)
        out.append(agg)
    return out


def _method_row(pi0: float, rep: int, mr: MethodResult) -> dict:
    return {
        "pi0": pi0,
        "rep": rep,
        "method": mr.method,
        "pi0_hat": mr.pi0_hat,
        "n_rejected": mr.eval.n_rejected,
        "fdp": mr.eval.fdp,
        "fnp": mr.eval.fnp,
    }


def cmd_sim(args) -> None:
    out_dir = Path(args.out)
    grid = _grid_from(args)
    pi0_values = _parse_float_list(args.pi0, "--pi0")
    if any(not 0.0 <= p <= 1.0 for p in pi0_values):
        raise UsageError("--pi0 values must lie in [0, 1]")
    phi_range = _parse_pair(args.phi_range, "--phi-range")
    maf_range = _parse_pair(args.maf_range, "--maf-range")
    per_run: list[dict] = []
    t_start = time.perf_counter()

    for pi0 in pi0_values:
        for rep in range(args.reps):
            ds_seed = derive_seed(args.seed, "dataset", args.scenario, repr(float(pi0)), rep)
            rep_dir = out_dir / f"pi0_{pi0:g}_rep{rep:03d}"
            if args.scenario == 1:
                config = SimIConfig(
                    m=args.m,
                    n=args.n,
                    pi0=pi0,
                    mu=args.mu,
                    sigma=args.sigma,
                    phi_range=phi_range,
                    maf_range=maf_range,
                    seed=ds_seed,
                )
                records, truth = simulate_I(config, grid)
                result = analyze_study_i(records, truth, args.alpha, args.gamma, grid)
                if args.write_datasets:
                    _write_sim_records(rep_dir, records, truth)
            else:
                k_range = _parse_pair(args.k_range, "--k-range")
                nc_range = _parse_pair(args.n_causal_range, "--n-causal-range")
                config = SimIIConfig(
                    m=args.m,
                    n=args.n,
                    pi0=pi0,
                    mu=args.mu,
                    sigma=args.sigma,
                    phi_range=phi_range,
                    maf_range=maf_range,
                    k_range=(int(k_range[0]), int(k_range[1])),
                    n_causal_range=(int(nc_range[0]), int(nc_range[1])),
                    ld_decay=args.ld_decay,
                    seed=ds_seed,
                )
                genes, truth = simulate_II(config, grid)
                result = run_study_ii(
                    genes,
                    truth,
                    sigma=args.sigma,
                    alpha=args.alpha,
                    gamma=args.gamma,
                    n_perms=args.perms,
                    perm_seed=derive_seed(ds_seed, "perm"),
                    threads=args.threads,
                    grid=grid,
                    perm_p=args.perm_p,
                )
                if args.write_datasets:
                    _write_sim_records(rep_dir, result.records, truth, result.quantiles)
            for mr in result.results.values():
                per_run.append(_method_row(pi0, rep, mr))
                print(
                    f"[timing] pi0={pi0:g} rep={rep} {mr.method}: {mr.seconds:.2f}s",
                    file=sys.stderr,
                )

    run_header = ["pi0", "rep", "method", "pi0_hat", "n_rejected", "fdp", "fnp"]
    write_tsv(
        out_dir / "results.tsv",
        run_header,
        [[row[k] for k in run_header] for row in per_run],
        [("scenario", args.scenario), ("alpha", args.alpha), ("gamma", args.gamma), ("seed", args.seed)],
    )
    aggregate = _aggregate(per_run)
    agg_header = ["pi0", "method", "reps"] + [
        f"{stat}_{f}" for f in ("pi0_hat", "fdp", "fnp", "n_rejected") for stat in ("mean", "min", "max")
    ]
    write_tsv(
        out_dir / "aggregate.tsv",
        agg_header,
        [[row[k] for k in agg_header] for row in aggregate],
        [("scenario", args.scenario), ("alpha", args.alpha), ("gamma", args.gamma), ("seed", args.seed)],
    )
    if args.json:
        doc = {
            "scenario": args.scenario,
            "alpha": args.alpha,
            "gamma": args.gamma,
            "seed": args.seed,
            "runs": per_run,
            "aggregate": aggregate,
        }
        _atomic_write_text(out_dir / "aggregate.json", json.dumps(doc, indent=2) + "\n")

    print(f"scenario {args.scenario}: {len(per_run)} method-runs in {time.perf_counter() - t_start:.1f}s")
    print(f"{'pi0':>6} {'method':>8} {'pi0_hat':>22} {'FDP':>8} {'FNP':>8}")
    for row in aggregate:
        spread = f"{_human(row['mean_pi0_hat'])} [{_human(row['min_pi0_hat'])}, {_human(row['max_pi0_hat'])}]"
        print(
            f"{row['pi0']:>6g} {row['method']:>8} {spread:>22} "
            f"{_human(row['mean_fdp']):>8} {_human(row['mean_fnp']):>8}"
        )


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bfdr",
        description="Bayes-factor false discovery rate control",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bf = sub.add_parser("bf", help="compute grid-averaged Bayes factors")
    p_bf.add_argument("--input", required=True, help="TSV with (id, z, se) or (id, y_file, g_file)")
    p_bf.add_argument("--output", required=True, help="output TSV path")
    p_bf.add_argument("--sigma", type=float, default=None, help="known residual standard deviation")
    p_bf.add_argument(
        "--estimate-sigma",
        action="store_true",
        help="estimate the residual standard deviation per test (single-variant rows only)",
    )
    p_bf.add_argument("--omega-grid", default=None, help="comma-separated prior scales")
    p_bf.add_argument("--json", action="store_true", help="also write a JSON mirror")
    p_bf.set_defaults(func=cmd_bf)

    p_fdr = sub.add_parser("fdr", help="estimate pi0 and decide at a target FDR")
    p_fdr.add_argument("--input", required=True, help="TSV of test records")
    p_fdr.add_argument("--output", required=True, help="output report TSV path")
    p_fdr.add_argument("--method", required=True, choices=["ebf", "qbf", "storey", "bh"])
    p_fdr.add_argument("--alpha", type=float, default=0.05, help="target FDR level")
    p_fdr.add_argument("--gamma", type=float, default=0.5, help="census quantile for qbf/storey")
    p_fdr.add_argument("--perms", type=int, default=0, help="permutations for qbf from raw data")
    p_fdr.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV_VAR} or 0)")
    p_fdr.add_argument("--sigma", type=float, default=None, help="residual sd for raw-data input")
    p_fdr.add_argument("--omega-grid", default=None, help="comma-separated prior scales")
    p_fdr.add_argument("--threads", type=int, default=1, help="worker processes for permutations")
    p_fdr.add_argument("--json", action="store_true", help="also write a JSON mirror")
    p_fdr.set_defaults(func=cmd_fdr)

    p_sim = sub.add_parser("sim", help="run a synthetic study end to end")
    p_sim.add_argument("--scenario", type=int, required=True, choices=[1, 2])
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--m", type=int, default=10000, help="number of tests (genes)")
    p_sim.add_argument("--n", type=int, default=None, help="sample size (default 100 / 85 by scenario)")
    p_sim.add_argument("--pi0", default="0.5", help="comma-separated true null proportions")
    p_sim.add_argument("--reps", type=int, default=1, help="replicates per pi0")
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--gamma", type=float, default=0.5)
    p_sim.add_argument("--mu", type=float, default=1.0, help="phenotype intercept")
    p_sim.add_argument("--sigma", type=float, default=1.0, help="residual standard deviation")
    p_sim.add_argument("--phi-range", default="0.5,1.5", help="effect-scale range low,high")
    p_sim.add_argument("--maf-range", default="0.05,0.5", help="allele-frequency range low,high")
    p_sim.add_argument("--k-range", default="40,120", help="variants per gene low,high (scenario 2)")
    p_sim.add_argument("--n-causal-range", default="1,5", help="causal variants low,high (scenario 2)")
    p_sim.add_argument("--ld-decay", type=float, default=0.4, help="adjacent dosage correlation (scenario 2)")
    p_sim.add_argument("--perms", type=int, default=100, help="permutations for qbf (scenario 2)")
    p_sim.add_argument(
        "--perm-p", type=int, default=0, help="permutations for the p-value baselines (scenario 2; 0 skips)"
    )
    p_sim.add_argument("--omega-grid", default=None, help="comma-separated prior scales")
    p_sim.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV_VAR} or 0)")
    p_sim.add_argument("--threads", type=int, default=1, help="worker processes")
    p_sim.add_argument("--json", action="store_true", help="also write aggregate JSON")
    p_sim.add_argument(
        "--no-datasets",
        dest="write_datasets",
        action="store_false",
        help="skip writing per-replicate records/truth files",
    )
    p_sim.set_defaults(func=cmd_sim, write_datasets=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        try:
            args.seed = _default_seed()
        except UsageError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    if getattr(args, "n", "sentinel") is None:
        args.n = 100 if args.scenario == 1 else 85
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
