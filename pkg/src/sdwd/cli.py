"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence (also
used when oracle-check finds a gap).  Logs go to stderr; artifacts go to
files or stdout.
"""
import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import simgen
from .cv import LAMBDA2_GRID, CvConfig, cross_validate, tune_on_validation
from .data import read_csv, read_features_csv, read_sparse, standardize, write_csv
from .errors import DataError, NonConvergenceError
from .model import fit_model, load_model, predict_class, predict_score, save_model
from .oracle import mutual_validation
from .path import PathConfig, adaptive_weights, fit_path, lambda_max, write_path
from .solver import PenaltySpec, SolverConfig, fit_fixed

log = logging.getLogger("sdwd")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v):
    return format(float(v), ".17g")


def _load(args):
    if args.format == "sparse":
        return read_sparse(args.data)
    return read_csv(args.data, label_column=args.label_column, has_header=not args.no_header)


def _solver_cfg(args):
    return SolverConfig(curvature=args.curvature)


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SDWD_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"SDWD_THREADS must be an integer, got {env!r}") from None


def _lambda2_for(args):
    if args.penalty == "lasso":
        if args.lambda2 not in (None, 0.0):
            raise UsageError("--penalty lasso forces lambda2 = 0; drop --lambda2")
        return 0.0
    if args.lambda2 is None:
        raise UsageError(f"--penalty {args.penalty} needs --lambda2")
    if args.lambda2 < 0:
        raise UsageError("--lambda2 must be >= 0")
    return args.lambda2


def _write_coefs(path, b0, coef, names):
    with open(path, "w") as fh:
        fh.write("feature\tindex\tvalue\n")
        fh.write(f"(intercept)\t0\t{_fmt(b0)}\n")
        for j in np.flatnonzero(coef):
            name = names[j] if names else f"x{j + 1}"
            fh.write(f"{name}\t{j + 1}\t{_fmt(coef[j])}\n")


def cmd_fit(args):
    lam2 = _lambda2_for(args)
    if args.lambda1 < 0:
        raise UsageError("--lambda1 must be >= 0")
    raw = _load(args)
    data, _ = standardize(raw)
    lmax = lambda_max(data)
    m = fit_model(raw, args.penalty, args.lambda1, lam2, stage1_lambda1=args.stage1_lambda1,
                  cfg=_solver_cfg(args))
    save_model(m, args.out)
    nnz = int(np.count_nonzero(m.beta))
    print(f"lambda_max\t{_fmt(lmax)}")
    print(f"nnz\t{nnz}")
    print(f"objective\t{_fmt(m.meta['objective'])}")
    print(f"kkt_max\t{_fmt(m.meta['kkt_max'])}")
    if args.coef_out:
        if args.coef_scale == "original":
            b0, coef = m.original_scale()
            names = raw.feature_names
        else:
            b0, coef = m.beta0, m.beta
            names = None if raw.feature_names is None else [
                raw.feature_names[j] for j in m.standardizer.kept]
        _write_coefs(args.coef_out, b0, coef, names)
    return EXIT_OK


def cmd_path(args):
    lam2 = _lambda2_for(args)
    raw = _load(args)
    data, std = standardize(raw)
    cfg = PathConfig(nlambda=args.nlambda, lambda_min_ratio=args.lambda_min_ratio,
                     lambda2=lam2, use_strong_rule=not args.no_strong_rule,
                     solver=_solver_cfg(args))
    weights = None
    if args.penalty == "aenet":
        if args.stage1_lambda1 is None:
            raise UsageError("--penalty aenet on a path needs --stage1-lambda1")
        first = fit_fixed(data, PenaltySpec(args.stage1_lambda1, lam2), cfg=cfg.solver)
        weights = adaptive_weights(first.beta, data.n)
    sp = fit_path(data, cfg, weights=weights)
    prefix = args.out_prefix
    write_path(sp, f"{prefix}.path.tsv", f"{prefix}.coef.tsv",
               standardizer=std if args.coef_scale == "original" else None)
    print(f"wrote {prefix}.path.tsv and {prefix}.coef.tsv ({len(sp)} grid points)")
    return EXIT_OK


def _parse_grid(text):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"bad --lambda2-grid {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise UsageError("--lambda2-grid needs nonnegative values")
    return vals


def cmd_cv(args):
    raw = _load(args)
    pcfg = PathConfig(nlambda=args.nlambda, lambda_min_ratio=args.lambda_min_ratio,
                      solver=_solver_cfg(args))
    folds = raw.n if args.folds == "n" else int(args.folds)
    cfg = CvConfig(folds=folds, lambda2_grid=_parse_grid(args.lambda2_grid), path_cfg=pcfg,
                   seed=args.seed, threads=_threads(args))
    if args.valid:
        valid = read_csv(args.valid, label_column=args.label_column,
                         has_header=not args.no_header)
        res = tune_on_validation(raw, valid, cfg, args.penalty)
    else:
        res = cross_validate(raw, cfg, args.penalty)
    res.write_tsv(args.report)
    save_model(res.final_model, args.model)
    bl, bk = res.best_index
    print(f"best_lambda1\t{_fmt(res.best_lambda1)}")
    print(f"best_lambda2\t{_fmt(res.best_lambda2)}")
    print(f"cv_error\t{_fmt(res.error_surface[bl, bk])}")
    print(f"nnz\t{int(np.count_nonzero(res.final_model.beta))}")
    return EXIT_OK


def cmd_predict(args):
    m = load_model(args.model)
    if args.labeled:
        ds = read_csv(args.data, label_column=args.label_column, has_header=not args.no_header)
        x, y = ds.x, ds.y
        if ds.label_names is not None and m.label_names is not None \
                and tuple(ds.label_names) != tuple(m.label_names):
            log.warning("label names %s differ from the model's %s", ds.label_names, m.label_names)
    else:
        x, y = read_features_csv(args.data, has_header=not args.no_header), None
    scores = predict_score(m, x)
    classes = predict_class(m, x)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("score\tclass\tlabel\n")
        for s, c in zip(scores, classes):
            out.write(f"{_fmt(s)}\t{int(c)}\t{m.label_for(c)}\n")
    finally:
        if args.out:
            out.close()
    if y is not None:
        log.info("misclassification rate %.6f", float(np.mean(classes != y)))
    return EXIT_OK


def cmd_simulate(args):
    spec = simgen.SimSpec(example_id=args.example, p=args.p, n_train=args.n_train,
                          n_valid=args.n_valid, n_test=args.n_test, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, ds in zip(("train", "valid", "test"), simgen.generate(spec)):
        write_csv(ds, out / f"example{args.example}_{name}.csv")
    be = simgen.bayes_error(args.example, args.p)
    print(f"example {args.example}: Bayes error {100 * be:.2f}%")
    return EXIT_OK


def cmd_oracle_check(args):
    cfg = SolverConfig()
    if args.update_constant is not None:
        # fault injection: plain global update with a wrong constant, step rule only
        cfg = SolverConfig(curvature="global", update_constant=args.update_constant,
                           kkt_tol=0.0, max_cycles=20_000)
    recs = mutual_validation(args.instances, args.seed, (args.min_n, args.max_n),
                             (args.min_p, args.max_p), solver_cfg=cfg, obj_tol=args.tol)
    print("instance\tn\tp\tmode\tlambda1\tlambda2\trel_objective_gap\tcoef_gap\tstatus")
    for r in recs:
        status = "pass" if r.passed else ("FAIL " + r.note if r.note else "FAIL")
        print(f"{r.index}\t{r.n}\t{r.p}\t{r.mode}\t{r.lambda1:.6g}\t{r.lambda2:g}\t"
              f"{r.relative_gap:.3e}\t{r.coef_gap:.3e}\t{status}")
    failed = sum(not r.passed for r in recs)
    print(f"{len(recs) - failed}/{len(recs)} instances passed")
    return EXIT_OK if failed == 0 else EXIT_NONCONV


def _data_opts(p, labeled=True):
    p.add_argument("--data", required=True, help="input file")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    if labeled:
        p.add_argument("--label-column", default="last",
                       help="label column: index, header name, or 'last' (default)")
        p.add_argument("--format", choices=("csv", "sparse"), default="csv")


def _solver_opts(p):
    p.add_argument("--curvature", choices=("adaptive", "global"), default="adaptive",
                   help="majorizer curvature (global = constant 4)")


def _path_opts(p):
    p.add_argument("--nlambda", type=int, default=100)
    p.add_argument("--lambda-min-ratio", type=float, default=None,
                   help="default 1e-4 if n < p else 1e-2")


def build_parser():
    parser = _Parser(prog="sdwd", description="Sparse distance weighted discrimination")
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for CV (fallback: SDWD_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one model at fixed (lambda1, lambda2)")
    _data_opts(p)
    p.add_argument("--penalty", choices=("lasso", "enet", "aenet"), default="lasso")
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--stage1-lambda1", type=float, default=None,
                   help="aenet: lambda1 of the first-stage elastic net (default: --lambda1)")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--coef-out", default=None, help="coefficient TSV")
    p.add_argument("--coef-scale", choices=("original", "standardized"), default="original")
    _solver_opts(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", help="solution path over a lambda1 grid")
    _data_opts(p)
    p.add_argument("--penalty", choices=("lasso", "enet", "aenet"), default="lasso")
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--stage1-lambda1", type=float, default=None)
    _path_opts(p)
    p.add_argument("--no-strong-rule", action="store_true")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--coef-scale", choices=("original", "standardized"), default="original")
    _solver_opts(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("cv", help="cross-validate (lambda1, lambda2) and refit")
    _data_opts(p)
    p.add_argument("--penalty", choices=("lasso", "enet", "aenet"), default="enet")
    p.add_argument("--folds", default="5", help="fold count, or 'n' for leave-one-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda2-grid", default=",".join(f"{v:g}" for v in LAMBDA2_GRID))
    p.add_argument("--valid", default=None, help="tune on this validation CSV instead of folds")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker threads across lambda2 values (fallback: SDWD_THREADS)")
    _path_opts(p)
    p.add_argument("--report", required=True, help="CV report TSV")
    p.add_argument("--model", required=True, help="final model file")
    _solver_opts(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("predict", help="score rows with a saved model")
    p.add_argument("--model", required=True)
    _data_opts(p, labeled=False)
    p.add_argument("--labeled", action="store_true", help="input has a label column")
    p.add_argument("--label-column", default="last")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="write train/valid/test CSVs for a design")
    p.add_argument("--example", type=int, required=True, choices=range(1, 6), metavar="{1..5}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=int, default=300)
    p.add_argument("--n-train", type=int, default=50)
    p.add_argument("--n-valid", type=int, default=50)
    p.add_argument("--n-test", type=int, default=10_000)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle-check", help="compare the solver with the reference solver")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-n", type=int, default=10)
    p.add_argument("--max-n", type=int, default=50)
    p.add_argument("--min-p", type=int, default=5)
    p.add_argument("--max-p", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--update-constant", type=float, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def _check_caps(args):
    if args.command == "oracle-check":
        if not (2 <= args.min_n <= args.max_n <= 200 and 1 <= args.min_p <= args.max_p <= 200):
            raise UsageError("oracle-check sizes must satisfy 2 <= min <= max <= 200")
    if getattr(args, "nlambda", 2) < 2:
        raise UsageError("--nlambda must be >= 2")
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s", force=True)
        _check_caps(args)
        resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        if "threads" in resolved:
            resolved["threads"] = _threads(args)
        log.info("config %s", resolved)
        return args.func(args)
    except UsageError as exc:
        print(f"sdwd: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"sdwd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NonConvergenceError as exc:
        print(f"sdwd: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except ValueError as exc:
        print(f"sdwd: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
