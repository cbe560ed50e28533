"""Command-line driver: simulate benchmarks, fit, cross-validate, reproduce.

Exit codes: 0 success, 1 usage error, 2 unreadable or invalid data files,
3 numeric failure inside a fit.
"""

import argparse
import csv
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import __version__
from .evaluation import estimated_rank
from .likelihood import LINKS, LOGIT, CoupledData
from .matrix_io import (DataFileError, ManifestTimer, read_matrix, write_json,
                        write_matrix)
from .model_selection import LambdaGridSpec, lambda_path
from .penalties import FAMILIES
from .simulation import (benchmark_params, binary_offsets_from_marginals,
                         drop_uninformative_binary_columns, simulate_coupled)
from .solver import FitConfig, fit_exact_rank, fit_gsca
from . import experiments

EXPERIMENT_IDS = ("table2", "fig3", "fig4", "fig5", "fig7", "fig8", "fig9",
                  "fig2-overfit")


class UsageError(Exception):
    pass


def _out_dir(args):
    out = args.out or os.environ.get("GSCA_OUTPUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _manifest_params(args):
    skip = {"func", "out"}
    params = {}
    for key, val in vars(args).items():
        if key in skip:
            continue
        params[key] = val if not isinstance(val, np.ndarray) else val.tolist()
    return params


def _write_rows_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in columns})


# === simulate ===

def cmd_simulate(args):
    try:
        j1 = args.J1
        mu1 = None
        if args.mu1_file is not None:
            marginals = read_matrix(args.mu1_file).ravel()
            mu1 = binary_offsets_from_marginals(marginals, args.I)
            j1 = len(mu1)
        params = benchmark_params(args.seed, I=args.I, J1=j1, J2=args.J2,
                                  R=args.R, snr1=args.snr1, snr2=args.snr2,
                                  sigma2=args.sigma2,
                                  realized_noise=args.realized_noise)
        if mu1 is not None:
            params = replace(params, mu1=mu1)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    timer = ManifestTimer("simulate", _manifest_params(args))
    data, truth = simulate_coupled(params)
    out = _out_dir(args)
    write_matrix(os.path.join(out, "X1.csv"), data.X1, mask=data.Q1, prefix="b")
    write_matrix(os.path.join(out, "X2.csv"), data.X2, mask=data.Q2, prefix="q")
    write_matrix(os.path.join(out, "Theta1.csv"), truth.Theta1, prefix="b")
    write_matrix(os.path.join(out, "Theta2.csv"), truth.Theta2, prefix="q")
    write_matrix(os.path.join(out, "Z.csv"), truth.Z)
    write_matrix(os.path.join(out, "mu.csv"), truth.mu.reshape(1, -1))
    write_matrix(os.path.join(out, "U.csv"), truth.U)
    write_matrix(os.path.join(out, "V1.csv"), truth.V1)
    write_matrix(os.path.join(out, "V2.csv"), truth.V2)
    write_matrix(os.path.join(out, "D.csv"), truth.D.reshape(1, -1))
    write_json(os.path.join(out, "truth.json"), {
        "I": params.I, "J1": params.J1, "J2": params.J2, "R": params.R,
        "snr1": params.snr1, "snr2": params.snr2, "sigma2": params.sigma2,
        "seed": args.seed, "c1": truth.c1, "c2": truth.c2,
        "realized_snr1": truth.realized_snr1,
        "realized_snr2": truth.realized_snr2,
        "realized_noise": params.realized_noise,
    })
    timer.write(os.path.join(out, "manifest.json"), __version__)
    print("simulated %dx(%d+%d), rank %d -> %s" % (params.I, params.J1,
                                                   params.J2, params.R, out))
    return 0


# === fit ===

def _load_data(args):
    X1 = read_matrix(args.x1)
    X2 = read_matrix(args.x2)
    try:
        data = CoupledData.from_arrays(X1, X2)
    except ValueError as exc:
        raise DataFileError(str(exc)) from exc
    kept = None
    if getattr(args, "drop_uninformative", False):
        X1k, Q1k, kept = drop_uninformative_binary_columns(data.X1, data.Q1)
        if kept.size < data.J1:
            data = CoupledData(X1k, data.X2, Q1k, data.Q2)
    return data, kept


def _penalty_from_args(args):
    if args.penalty is None:
        raise UsageError("--penalty is required unless --exact-rank is given")
    hyper = None
    if args.penalty == "lq":
        hyper = args.q
    elif args.penalty in ("scad", "gdp"):
        hyper = args.gamma
    try:
        return experiments.build_penalty(args.penalty, args.lam, hyper)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _fit_config(args, penalty):
    try:
        return FitConfig(penalty=penalty, link=args.link, eps_f=args.eps,
                         max_iter=args.max_iter, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_fit_outputs(out, fit, extra=None):
    payload = {
        "mu": fit.mu.tolist(),
        "sigma2": None if np.isnan(fit.sigma2) else fit.sigma2,
        "singular_values": fit.singular_values.tolist(),
        "rank": estimated_rank(fit.singular_values),
        "iterations": fit.iterations,
        "converged": fit.converged,
        "warned_saturated": fit.warned_saturated,
        "final_loss": float(fit.loss_trace[-1]) if fit.loss_trace.size else None,
        "loss_trace": fit.loss_trace.tolist(),
    }
    if extra:
        payload.update(extra)
    write_json(os.path.join(out, "fit.json"), payload)
    write_matrix(os.path.join(out, "Z.csv"), fit.Z)
    write_matrix(os.path.join(out, "A.csv"), fit.A)
    write_matrix(os.path.join(out, "B1.csv"), fit.B1)
    write_matrix(os.path.join(out, "B2.csv"), fit.B2)
    return payload


def cmd_fit(args):
    if args.exact_rank is not None and args.penalty is not None:
        raise UsageError("--exact-rank and --penalty are mutually exclusive")
    timer = ManifestTimer("fit", _manifest_params(args))
    data, kept = _load_data(args)
    timer.add_input("x1", args.x1)
    timer.add_input("x2", args.x2)

    if args.exact_rank is not None:
        config = _fit_config(args, None)
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                fit = fit_exact_rank(data, args.exact_rank, config)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        label = "exact-rank(%d)" % args.exact_rank
    else:
        penalty = _penalty_from_args(args)
        config = _fit_config(args, penalty)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fit = fit_gsca(data, config)
        label = "%s(lambda=%g)" % (penalty.family, penalty.lam)

    for w in caught:
        print("warning: %s" % w.message, file=sys.stderr)
    out = _out_dir(args)
    extra = {"model": label, "link": args.link, "eps_f": args.eps}
    if kept is not None:
        extra["kept_binary_columns"] = kept.tolist()
    payload = _write_fit_outputs(out, fit, extra)
    timer.write(os.path.join(out, "manifest.json"), __version__)
    print("fit %s: rank=%d sigma2=%s iterations=%d converged=%s -> %s"
          % (label, payload["rank"], payload["sigma2"], fit.iterations,
             fit.converged, out))
    return 0


# === cv ===

def cmd_cv(args):
    timer = ManifestTimer("cv", _manifest_params(args))
    data, kept = _load_data(args)
    timer.add_input("x1", args.x1)
    timer.add_input("x2", args.x2)
    penalty = _penalty_from_args(args)
    config = _fit_config(args, penalty)
    try:
        grid = LambdaGridSpec(n_lambda=args.n_lambda,
                              lambda_max=args.lambda_max,
                              lambda_min=args.lambda_min)
        result, refit = lambda_path(data, config, grid=grid, K=args.K,
                                    fold_seed=args.fold_seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    out = _out_dir(args)
    write_json(os.path.join(out, "cv.json"), {
        "lambda_grid": result.lambda_grid.tolist(),
        "cv_mean": result.cv_mean.tolist(),
        "cv_se": result.cv_se.tolist(),
        "rank_cv": result.rank_cv.tolist(),
        "rank_refit": result.rank_refit.tolist(),
        "best_lambda": result.best_lambda,
        "lambda_1se": result.lambda_1se,
        "K": result.K,
    })
    _write_rows_csv(os.path.join(out, "cv_log.csv"), result.records,
                    ["lambda", "effective_lambda", "fold", "error", "rank",
                     "sigma2_hat", "iterations", "saturated"])
    extra = {"model": "%s(best lambda=%g)" % (penalty.family,
                                              result.best_lambda),
             "link": args.link, "eps_f": args.eps}
    if kept is not None:
        extra["kept_binary_columns"] = kept.tolist()
    _write_fit_outputs(out, refit, extra)
    timer.write(os.path.join(out, "manifest.json"), __version__)
    print("cv done: best lambda=%g (1se %g), refit rank=%d -> %s"
          % (result.best_lambda, result.lambda_1se,
             estimated_rank(refit.singular_values), out))
    return 0


# === reproduce ===

_EVAL_COLUMNS = ["label", "family", "hyper", "lambda", "rmse_theta",
                 "rmse_theta1", "rmse_theta2", "rmse_mu", "rmse_z",
                 "rmse_z1", "rmse_z2", "rank", "sigma2_hat", "iterations",
                 "converged", "saturated"]


def _dims_kwargs(args):
    if args.dims is None:
        return {}
    try:
        I, J1, J2, R = (int(v) for v in args.dims.split(","))
    except ValueError:
        raise UsageError("--dims expects four integers: I,J1,J2,R")
    return {"I": I, "J1": J1, "J2": J2, "R": R}


def _reproduce_table2(args, out):
    res = experiments.table2_experiment(args.seed, n_lambda=args.n_lambda,
                                        eps=args.eps or 1e-8,
                                        **_dims_kwargs(args))
    rows = [res["best"][key] for key in experiments.TABLE_FAMILIES]
    rows.append(res["best"]["full_information"])
    _write_rows_csv(os.path.join(out, "table2.csv"), rows, _EVAL_COLUMNS)
    return res


def _reproduce_fig3(args, out):
    data, truth = experiments.make_benchmark_data(args.seed,
                                                  **_dims_kwargs(args))
    rows = experiments.sweep_lambda(data, truth, "nuclear",
                                    n_lambda=args.n_lambda,
                                    eps=args.eps or 1e-8)
    _write_rows_csv(os.path.join(out, "fig3.csv"), rows, _EVAL_COLUMNS)


def _reproduce_fig4(args, out):
    rows = experiments.hyper_sweep(args.seed, n_lambda=args.n_lambda,
                                   eps=args.eps or 1e-8, **_dims_kwargs(args))
    _write_rows_csv(os.path.join(out, "fig4.csv"), rows, _EVAL_COLUMNS)


def _reproduce_fig5(args, out):
    res = _reproduce_table2(args, out)
    true_sv = res["true_singular_values"]
    series = {"true": true_sv}
    for key in experiments.TABLE_FAMILIES:
        series[res["best"][key]["label"]] = res["best"][key]["singular_values"]
    series["full information"] = res["best"]["full_information"]["singular_values"]
    n = min(len(v) for v in series.values())
    with open(os.path.join(out, "fig5.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component"] + list(series))
        for r in range(n):
            writer.writerow([r + 1] + [repr(float(v[r])) for v in series.values()])


def _reproduce_fig7(args, out):
    snrs = np.geomspace(0.1, 100.0, args.snr_points)
    rows = experiments.snr_sweep(args.seed, snrs, n_lambda=args.n_lambda,
                                 eps=args.eps or 1e-8, **_dims_kwargs(args))
    _write_rows_csv(os.path.join(out, "fig7.csv"), rows,
                    ["snr"] + _EVAL_COLUMNS)


def _reproduce_fig8(args, out):
    rows = experiments.gamma_cv_sweep(args.seed, n_lambda=args.n_lambda,
                                      eps=args.eps or 1e-5,
                                      **_dims_kwargs(args))
    _write_rows_csv(os.path.join(out, "fig8.csv"), rows,
                    ["gamma", "best_lambda", "min_cv_error", "cv_se",
                     "bayes_error", "rmse_theta", "rmse_mu", "rmse_z", "rank"])


def _reproduce_fig9(args, out):
    res = experiments.cv_experiment(args.seed, n_lambda=args.n_lambda,
                                    eps=args.eps or 1e-5, **_dims_kwargs(args))
    cv = res["cv"]
    rows = [{"lambda": cv.lambda_grid[i], "cv_mean": cv.cv_mean[i],
             "cv_se": cv.cv_se[i], "rank_cv": cv.rank_cv[i],
             "rank_refit": cv.rank_refit[i]} for i in range(len(cv.lambda_grid))]
    _write_rows_csv(os.path.join(out, "fig9.csv"), rows,
                    ["lambda", "cv_mean", "cv_se", "rank_cv", "rank_refit"])
    report = res["refit_report"]
    write_json(os.path.join(out, "fig9.json"), {
        "best_lambda": cv.best_lambda, "lambda_1se": cv.lambda_1se,
        "bayes_error": res["bayes_error"],
        "min_cv_error": float(np.min(cv.cv_mean)),
        "refit_rank": report.rank, "refit_rmse_theta": report.rmse_theta,
    })


def _reproduce_fig2_overfit(args, out):
    res = experiments.overfit_experiment(args.seed, **_dims_kwargs(args))
    _write_rows_csv(os.path.join(out, "fig2_overfit.csv"), res["rows"],
                    ["eps_f", "R", "max_abs_B1", "max_abs_B2", "iterations",
                     "converged", "sigma2_hat", "rank"])
    for eps, fit in res["fits"].items():
        write_matrix(os.path.join(out, "B1_eps%g.csv" % eps), fit.B1)


def cmd_reproduce(args):
    if args.experiment not in EXPERIMENT_IDS:
        raise UsageError("unknown experiment %r; valid ids: %s"
                         % (args.experiment, ", ".join(EXPERIMENT_IDS)))
    timer = ManifestTimer("reproduce", _manifest_params(args))
    out = _out_dir(args)
    handler = {
        "table2": _reproduce_table2, "fig3": _reproduce_fig3,
        "fig4": _reproduce_fig4, "fig5": _reproduce_fig5,
        "fig7": _reproduce_fig7, "fig8": _reproduce_fig8,
        "fig9": _reproduce_fig9, "fig2-overfit": _reproduce_fig2_overfit,
    }[args.experiment]
    handler(args, out)
    timer.write(os.path.join(out, "manifest.json"), __version__)
    print("reproduced %s -> %s" % (args.experiment, out))
    return 0


# === parser ===

def _add_fit_flags(p, cv=False):
    p.add_argument("--x1", required=True, help="binary block CSV")
    p.add_argument("--x2", required=True, help="quantitative block CSV")
    p.add_argument("--penalty", choices=FAMILIES, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.1,
                   help="lq exponent (with --penalty lq)")
    p.add_argument("--gamma", type=float, default=None,
                   help="scad/gdp hyper-parameter")
    p.add_argument("--link", choices=LINKS, default=LOGIT)
    p.add_argument("--eps", type=float, default=1e-5 if cv else 1e-8,
                   help="relative objective-decrease stop")
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-uninformative", action="store_true",
                   help="drop binary columns with constant observed values")
    p.add_argument("--out", default=None)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gsca",
        description="Low-rank factorization of coupled binary and "
                    "quantitative data by penalized maximum likelihood.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated benchmark data set")
    p.add_argument("--I", type=int, default=160)
    p.add_argument("--J1", type=int, default=410)
    p.add_argument("--J2", type=int, default=1000)
    p.add_argument("--R", type=int, default=10)
    p.add_argument("--snr1", type=float, default=1.0)
    p.add_argument("--snr2", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--realized-noise", action="store_true",
                   help="scale the quantitative block against the sampled "
                        "noise energy instead of its expectation")
    p.add_argument("--mu1-file", default=None,
                   help="CSV of binary marginal probabilities (one column)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one model to data files")
    _add_fit_flags(p)
    p.add_argument("--exact-rank", type=int, default=None,
                   help="unpenalized fit at this exact rank (no --penalty)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="cross-validated penalty path plus refit")
    _add_fit_flags(p, cv=True)
    p.add_argument("--K", type=int, default=7)
    p.add_argument("--n-lambda", type=int, default=30)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--fold-seed", type=int, default=0)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("reproduce", help="rerun a published benchmark sweep")
    p.add_argument("experiment", help="one of: %s" % ", ".join(EXPERIMENT_IDS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-lambda", type=int, default=30)
    p.add_argument("--eps", type=float, default=None,
                   help="override the experiment's default tolerance")
    p.add_argument("--snr-points", type=int, default=20)
    p.add_argument("--dims", default=None,
                   help="override problem size as I,J1,J2,R (smoke tests)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except DataFileError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except (FloatingPointError, OverflowError, np.linalg.LinAlgError) as exc:
        print("numeric failure: %s" % exc, file=sys.stderr)
        return 3


def run():
    sys.exit(main())
