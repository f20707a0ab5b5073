"""Command-line entry point: ``extremefactor <command> [flags]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clique import aggregate_log_ratios, run_clique_benchmark
from .clustering import scram
from .errors import ExtremeFactorError, SolverDisagreement
from .extremal_stats import empirical_chi, extract_block_maxima
from .io import (MANIFEST_NAME, RunManifest, read_json, read_matrix_csv, write_json,
                 write_matrix_csv, write_rows_csv)
from .metrics import empirical_tail_probability, evaluate, tail_probability
from .simulate import SimConfig, synthesize_panel
from .tuning import DEFAULT_GRID, practical_delta, select_delta

log = logging.getLogger("extremefactor")

SOLVERS = {"bk": "bron_kerbosch", "bnb": "branch_and_bound", "auto": "auto"}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _col_names(prefix: str, d: int) -> list[str]:
    return [f"{prefix}{j}" for j in range(d)]


def _load_panel(path: Path) -> np.ndarray:
    X, _ = read_matrix_csv(path)
    if X.shape[1] < 2:
        raise ExtremeFactorError(f"{path}: need at least two columns")
    return X


# -- commands ---------------------------------------------------------------

def cmd_simulate(args, parser) -> RunManifest:
    if args.d < 2:
        parser.error("--d must be >= 2")
    if not 1 <= args.k_factors <= args.d:
        parser.error("--k-factors must satisfy 1 <= K <= d")
    cfg = SimConfig(n=args.n, d=args.d, K=args.k_factors, rho=args.rho, p=args.p,
                    theta=args.theta, seed=args.seed)
    try:
        cfg.validate()
    except ExtremeFactorError as exc:
        parser.error(str(exc))
    model = synthesize_panel(cfg)
    out = args.out
    man = RunManifest("simulate", cfg.to_dict(), args.seed, __version__)
    write_matrix_csv(out / "X.csv", model.X, _col_names("x", cfg.d))
    write_json(out / "truth.json", {
        "A": model.A.entries, "K": cfg.K, "seed": cfg.seed, "rho": cfg.rho,
        "p": cfg.p, "theta": cfg.theta, "manifest": MANIFEST_NAME,
    })
    man.outputs = ["X.csv", "truth.json"]
    return man


def _fit_delta(args, parser, m: int, k: int, d: int) -> float:
    if args.delta is not None:
        delta = args.delta
    else:
        delta = practical_delta(m, k, d, args.c1, args.c2).value
    if not 0.0 < delta < 0.5:
        parser.error(f"delta must lie in (0, 0.5), got {delta:.6g}")
    return delta


def cmd_fit(args, parser) -> RunManifest:
    if args.delta is not None and not 0.0 < args.delta < 0.5:
        parser.error("--delta must lie in (0, 0.5)")
    X = _load_panel(args.input)
    chi, mado, bm, u = empirical_chi(X, args.block_size, workers=args.threads)
    d = X.shape[1]
    delta = _fit_delta(args, parser, args.block_size, bm.k, d)
    fit = scram(chi, delta, SOLVERS[args.solver])
    flags = dict(fit.flags)
    flags["tie_warnings"] = u.tied_columns
    flags["clipped_madogram_pairs"] = int(np.triu(mado.clipped, 1).sum())
    params = {"block_size": args.block_size, "blocks": bm.k, "delta": delta,
              "c1": args.c1, "c2": args.c2, "solver": args.solver}
    man = RunManifest("fit", params, args.seed, __version__, inputs=[str(args.input)])
    write_json(args.out / "fit.json", {
        "k_hat": fit.k_hat,
        "delta": delta,
        "pure_groups": [list(g) for g in fit.partition.groups],
        "A": fit.loading.entries,
        "clusters": [list(g) for g in fit.clusters.groups],
        "flags": flags,
        "manifest": MANIFEST_NAME,
    })
    write_matrix_csv(args.out / "chi.csv", chi.values, _col_names("x", d))
    write_matrix_csv(args.out / "madogram.csv", mado.values, _col_names("x", d))
    man.outputs = ["fit.json", "chi.csv", "madogram.csv"]
    return man


def cmd_tune(args, parser) -> RunManifest:
    if args.input is None and args.chi is None:
        parser.error("tune needs --input or --chi")
    if args.input is not None:
        X = _load_panel(args.input)
        chi, _, bm, _ = empirical_chi(X, args.block_size, workers=args.threads)
        k = bm.k
        source = args.input
    else:
        if args.blocks is None:
            parser.error("--chi needs --blocks (the block count k)")
        chi, _ = read_matrix_csv(args.chi)
        k = args.blocks
        source = args.chi
    grid = args.grid if args.grid else list(DEFAULT_GRID)
    trace = select_delta(chi, args.block_size, k, grid=grid, c2=args.c2, solver=SOLVERS[args.solver])
    rows = [{"c": p.c, "delta": p.delta, "k_hat": p.k_hat, "criterion": p.criterion, "stage": p.stage}
            for p in trace.grid]
    params = {"block_size": args.block_size, "blocks": k, "c2": args.c2, "grid": grid, "solver": args.solver}
    man = RunManifest("tune", params, args.seed, __version__, inputs=[str(source)])
    write_rows_csv(args.out / "tuning.csv", rows, ["c", "delta", "k_hat", "criterion", "stage"])
    write_json(args.out / "tune.json", {
        "delta_star": trace.delta_star, "c_star": trace.c_star, "selected": trace.selected,
        "warnings": trace.warnings, "manifest": MANIFEST_NAME,
    })
    man.outputs = ["tuning.csv", "tune.json"]
    return man


def cmd_benchmark_clique(args, parser) -> RunManifest:
    if args.reps < 1:
        parser.error("--reps must be >= 1")
    if not args.dims or not args.sparsities:
        parser.error("--dims and --sparsities must be non-empty")
    records = run_clique_benchmark(args.dims, args.sparsities, args.reps, seed=args.seed)
    rows = [{"d": r.d, "s": r.s, "rep": r.rep, "t_bk_seconds": r.t_bk,
             "t_bnb_seconds": r.t_bnb, "clique_size": r.clique_size} for r in records]
    params = {"dims": args.dims, "sparsities": args.sparsities, "reps": args.reps}
    man = RunManifest("benchmark-clique", params, args.seed, __version__)
    write_rows_csv(args.out / "benchmark.csv", rows,
                   ["d", "s", "rep", "t_bk_seconds", "t_bnb_seconds", "clique_size"])
    write_rows_csv(args.out / "benchmark_ratios.csv", aggregate_log_ratios(records),
                   ["d", "s", "reps", "mean_log_ratio", "ratio_of_means"])
    man.outputs = ["benchmark.csv", "benchmark_ratios.csv"]
    return man


def cmd_metrics(args, parser) -> RunManifest:
    est = read_json(args.estimate)
    truth = read_json(args.truth)
    try:
        A_hat = np.asarray(est["A"], dtype=float)
        A = np.asarray(truth["A"], dtype=float)
    except KeyError:
        raise ExtremeFactorError("both documents need an 'A' field") from None
    report = evaluate(A_hat, A, est.get("pure_groups"))
    man = RunManifest("metrics", {}, args.seed, __version__,
                      inputs=[str(args.estimate), str(args.truth)])
    write_json(args.out / "metrics.json", {
        "k_true": report.k_true, "k_hat": report.k_hat, "exact_recovery": report.exact_recovery,
        "l2_loss": report.l2_loss, "tfpp": report.tfpp, "tfnp": report.tfnp,
        "centroid_distance": report.centroid_distance, "flags": report.flags,
        "manifest": MANIFEST_NAME,
    })
    man.outputs = ["metrics.json"]
    return man


def cmd_tailprob(args, parser) -> RunManifest:
    fit = read_json(args.fit)
    A_hat = np.asarray(fit["A"], dtype=float)
    clusters = fit["clusters"]
    if not 0 <= args.cluster < len(clusters):
        parser.error(f"--cluster must be in [0, {len(clusters) - 1}]")
    if any(t <= 0 for t in args.thresholds):
        parser.error("--thresholds must be positive")
    X = _load_panel(args.input)
    if X.shape[1] != A_hat.shape[0]:
        raise ExtremeFactorError("panel and fit disagree on the dimension")
    bm = extract_block_maxima(X, args.block_size)
    cluster = clusters[args.cluster]
    rows = []
    for t in sorted(args.thresholds):
        x = np.full(A_hat.shape[0], t)
        p_model, above_one = tail_probability(A_hat, cluster, x)
        rows.append({"threshold": t, "model_p": p_model,
                     "empirical_p": empirical_tail_probability(bm, cluster, x),
                     "model_above_one": int(above_one)})
    params = {"cluster": args.cluster, "block_size": args.block_size, "thresholds": args.thresholds}
    man = RunManifest("tailprob", params, args.seed, __version__, inputs=[str(args.fit), str(args.input)])
    write_rows_csv(args.out / "tailprob.csv", rows, ["threshold", "model_p", "empirical_p", "model_above_one"])
    man.outputs = ["tailprob.csv"]
    return man


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", type=Path, default=Path("."))
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="extremefactor", description=__doc__, parents=[common])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic panel")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--d", type=int, default=200)
    p.add_argument("--k-factors", type=int, default=20)
    p.add_argument("--rho", type=float, default=0.8)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--theta", type=float, default=1.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="estimate the loading matrix")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--block-size", type=int, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--c1", type=float, default=1.2)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="bnb")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("tune", parents=[common], help="choose delta over a grid")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", type=Path)
    src.add_argument("--chi", type=Path, help="precomputed extremal correlation matrix")
    p.add_argument("--blocks", type=int, help="block count k, needed with --chi")
    p.add_argument("--block-size", type=int, required=True)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--grid", type=_float_list)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="bnb")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("benchmark-clique", parents=[common], help="time both clique solvers")
    p.add_argument("--dims", type=_int_list, default=[100])
    p.add_argument("--sparsities", type=_int_list, default=[2, 10])
    p.add_argument("--reps", type=int, default=5)
    p.set_defaults(func=cmd_benchmark_clique)

    p = sub.add_parser("metrics", parents=[common], help="score an estimate against the truth")
    p.add_argument("--estimate", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("tailprob", parents=[common], help="failure-set probability curve")
    p.add_argument("--fit", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--block-size", type=int, required=True)
    p.add_argument("--cluster", type=int, required=True)
    p.add_argument("--thresholds", type=_float_list, required=True)
    p.set_defaults(func=cmd_tailprob)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        man = args.func(args, parser)
        man.write(args.out)
    except (ExtremeFactorError, SolverDisagreement, OSError) as exc:
        print(f"extremefactor {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
