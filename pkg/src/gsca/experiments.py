"""Benchmark sweeps: penalty paths, SNR grids, CV traces, overfit runs.

Everything here is deterministic given its seed arguments and returns plain
row dicts, so the CLI can dump results as tidy CSV and the test suite can
assert on the same numbers.
"""

import warnings

import numpy as np

from .evaluation import estimated_rank, evaluate_fit
from .likelihood import CoupledData
from .model_selection import (LambdaGridSpec, bayes_error, diagonal_folds,
                              find_lambda_bounds, lambda_path)
from .penalties import gdp, has_absorbing_zeros, lq, nuclear, scad
from .simulation import (benchmark_params, drop_uninformative_binary_columns,
                         sample_latent_binary_block, sca_full_information,
                         simulate_coupled, subset_binary_columns)
from .solver import FitConfig, fit_exact_rank, fit_path_point

FAMILY_LABELS = {
    ("nuclear", None): "L1",
    ("lq", 0.1): "L0.1",
    ("scad", 5.0): "SCAD(5)",
    ("gdp", 1.0): "GDP(1)",
}

TABLE_FAMILIES = (("nuclear", None), ("lq", 0.1), ("scad", 5.0), ("gdp", 1.0))


def build_penalty(family, lam, hyper=None):
    if family == "nuclear":
        return nuclear(lam)
    if family == "lq":
        return lq(lam, 0.1 if hyper is None else hyper)
    if family == "scad":
        return scad(lam, 5.0 if hyper is None else hyper)
    if family == "gdp":
        return gdp(lam, 1.0 if hyper is None else hyper)
    raise ValueError("unknown family %r" % (family,))


def family_label(family, hyper):
    label = FAMILY_LABELS.get((family, hyper))
    if label is None:
        label = "%s(%s)" % (family, hyper)
    return label


def make_benchmark_data(seed, snr=1.0, I=160, J1=410, J2=1000, R=10,
                        sigma2=1.0):
    """Simulated benchmark data with uninformative binary columns removed
    and the ground truth subset accordingly."""
    params = benchmark_params(seed, I=I, J1=J1, J2=J2, R=R,
                              snr1=snr, snr2=snr, sigma2=sigma2)
    data, truth = simulate_coupled(params)
    X1, Q1, kept = drop_uninformative_binary_columns(data.X1, data.Q1)
    if kept.size < data.J1:
        data = CoupledData(X1, data.X2, Q1, data.Q2)
        truth = subset_binary_columns(truth, kept)
    return data, truth


def sweep_lambda(data, truth, family, hyper=None, n_lambda=30, eps=1e-8,
                 seed=0, max_iter=10000, lambda_max=None, lambda_min=None):
    """Fit a descending penalty path and score every fit against truth.

    Returns a list of row dicts (largest lambda first). Each point is fit
    under the per-family start policy of fit_path_point (nuclear: warm
    chain; lq q < 1: cold; scad/gdp: warm and cold, best objective wins);
    a saturated fit breaks the warm chain. The iterations column counts
    every start's work at that point.
    """
    config = FitConfig(penalty=build_penalty(family, 1.0, hyper), eps_f=eps,
                       seed=seed, max_iter=max_iter)
    if lambda_max is None or lambda_min is None:
        auto_max, auto_min = find_lambda_bounds(data, config)
        lambda_max = lambda_max if lambda_max is not None else auto_max
        lambda_min = lambda_min if lambda_min is not None else auto_min
    lambdas = np.geomspace(lambda_max, lambda_min, n_lambda)
    rows = []
    warm = None
    chain_warm = not has_absorbing_zeros(config.penalty)
    for lam in lambdas:
        fit, fits = fit_path_point(data, config, lam, warm)
        report = evaluate_fit(fit, truth)
        row = {"family": family, "hyper": hyper,
               "label": family_label(family, hyper), "lambda": float(lam)}
        row.update(report.to_dict())
        row.update({"iterations": sum(f.iterations for f in fits),
                    "converged": fit.converged,
                    "saturated": fit.warned_saturated,
                    "singular_values": fit.singular_values.copy()})
        rows.append(row)
        warm = fit if chain_warm and not fit.warned_saturated else None
    return rows


def best_row(rows):
    """Path point with the smallest Theta error.

    Saturated points are excluded: a fit stopped at the noise-variance
    floor is a degenerate iterate, not a converged model of the family.
    If every point saturated, falls back to the raw minimum.
    """
    valid = [r for r in rows if not r["saturated"]]
    return min(valid or rows, key=lambda r: r["rmse_theta"])


def full_information_row(data, truth, seed, R):
    """Score the rank-R least-squares baseline on the noise-free-link data."""
    X1_star = sample_latent_binary_block(truth, [seed, 3])
    baseline = sca_full_information(X1_star, data.X2, R)
    report = evaluate_fit(baseline, truth)
    row = {"family": "full_information", "hyper": None,
           "label": "full information", "lambda": float("nan")}
    row.update(report.to_dict())
    row.update({"iterations": 0, "converged": True, "saturated": False,
                "singular_values": baseline.singular_values.copy()})
    return row


def table2_experiment(seed, n_lambda=30, eps=1e-8, families=TABLE_FAMILIES,
                      **data_kwargs):
    """Best-lambda recovery per penalty family plus the baseline.

    Returns a dict with the data/truth pair, per-family full paths, the
    best rows, and the true spectrum (for singular-value comparisons).
    """
    data, truth = make_benchmark_data(seed, **data_kwargs)
    paths = {}
    best = {}
    for family, hyper in families:
        rows = sweep_lambda(data, truth, family, hyper, n_lambda=n_lambda,
                            eps=eps)
        paths[(family, hyper)] = rows
        best[(family, hyper)] = best_row(rows)
    best["full_information"] = full_information_row(data, truth, seed,
                                                    truth.params.R)
    return {"seed": seed, "data": data, "truth": truth, "paths": paths,
            "best": best,
            "true_singular_values": np.linalg.svd(truth.Z, compute_uv=False)}


def snr_sweep(seed, snrs, families=(("gdp", 1.0), ("lq", 0.1), ("nuclear", None)),
              n_lambda=30, eps=1e-8, include_baseline=True, **data_kwargs):
    """Best-lambda recovery per family across signal-to-noise ratios.

    The seed is shared across SNRs, so factors and offsets stay identical
    and only the scale factors move.
    """
    rows = []
    for snr in snrs:
        data, truth = make_benchmark_data(seed, snr=snr, **data_kwargs)
        for family, hyper in families:
            path = sweep_lambda(data, truth, family, hyper,
                                n_lambda=n_lambda, eps=eps)
            row = dict(best_row(path))
            row["snr"] = float(snr)
            rows.append(row)
        if include_baseline:
            row = full_information_row(data, truth, seed, truth.params.R)
            row["snr"] = float(snr)
            rows.append(row)
    return rows


def hyper_sweep(seed, grids=None, n_lambda=30, eps=1e-8, **data_kwargs):
    """Best-lambda recovery as a function of each family's hyper-parameter."""
    if grids is None:
        grids = {
            "lq": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            "scad": [2.1, 3.0, 5.0, 10.0, 20.0, 40.0, 80.0],
            "gdp": [0.01, 0.1, 1.0, 10.0, 100.0, 500.0],
        }
    data, truth = make_benchmark_data(seed, **data_kwargs)
    rows = []
    for family, values in grids.items():
        for hyper in values:
            path = sweep_lambda(data, truth, family, hyper,
                                n_lambda=n_lambda, eps=eps)
            rows.append(dict(best_row(path)))
    return rows


def cv_experiment(seed, gamma=1.0, K=7, n_lambda=30, eps=1e-5,
                  fold_seed=None, **data_kwargs):
    """K-fold CV curve for the gdp family plus the ground-truth floor."""
    data, truth = make_benchmark_data(seed, **data_kwargs)
    fold_seed = seed if fold_seed is None else fold_seed
    config = FitConfig(penalty=gdp(1.0, gamma), eps_f=eps, seed=seed)
    result, refit = lambda_path(data, config,
                                grid=LambdaGridSpec(n_lambda=n_lambda),
                                K=K, fold_seed=fold_seed)
    folds = diagonal_folds(data, K, fold_seed)
    bayes = bayes_error(data, folds, truth, config.link)
    return {"seed": seed, "data": data, "truth": truth, "cv": result,
            "refit": refit, "bayes_error": bayes,
            "refit_report": evaluate_fit(refit, truth)}


def overfit_experiment(seed, R=3, eps_pair=(1e-5, 1e-8), max_iter=50000,
                       **data_kwargs):
    """Exact-rank fits at a loose and a tight tolerance from the same start.

    With binary data the unpenalized loadings keep growing as the fit is
    pushed harder; the returned rows expose max|B1| and iteration counts.
    """
    data, truth = make_benchmark_data(seed, **data_kwargs)
    rows = []
    fits = {}
    for eps in eps_pair:
        config = FitConfig(penalty=None, eps_f=eps, seed=seed,
                           max_iter=max_iter)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = fit_exact_rank(data, R, config)
        fits[eps] = fit
        rows.append({"eps_f": eps, "R": R,
                     "max_abs_B1": float(np.abs(fit.B1).max()),
                     "max_abs_B2": float(np.abs(fit.B2).max()),
                     "iterations": fit.iterations,
                     "converged": fit.converged,
                     "sigma2_hat": fit.sigma2,
                     "rank": estimated_rank(fit.singular_values)})
    return {"seed": seed, "data": data, "truth": truth, "rows": rows,
            "fits": fits}


def gamma_cv_sweep(seed, gammas=(0.01, 0.1, 1.0, 10.0, 100.0), K=7,
                   n_lambda=30, eps=1e-5, **data_kwargs):
    """Min CV error and best-lambda recovery per gdp hyper-parameter."""
    rows = []
    for gamma in gammas:
        out = cv_experiment(seed, gamma=gamma, K=K, n_lambda=n_lambda,
                            eps=eps, **data_kwargs)
        cv = out["cv"]
        idx = int(np.argmin(cv.cv_mean))
        report = out["refit_report"]
        rows.append({"gamma": gamma, "best_lambda": cv.best_lambda,
                     "min_cv_error": float(cv.cv_mean[idx]),
                     "cv_se": float(cv.cv_se[idx]),
                     "bayes_error": out["bayes_error"],
                     "rmse_theta": report.rmse_theta,
                     "rmse_mu": report.rmse_mu, "rmse_z": report.rmse_z,
                     "rank": report.rank})
    return rows
