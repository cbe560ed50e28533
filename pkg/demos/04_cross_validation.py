"""Choosing the penalty strength by element-wise K-fold cross-validation.

Rows and columns both carry structure, so whole-row hold-out would throw
away exactly what the model needs. Instead the folds tile the matrix in
staggered diagonals: every fold drops scattered entries while every row and
column keeps most of theirs. Each candidate strength is fitted K times with
one fold hidden, scored by held-out negative log-likelihood, and the
strength with the lowest mean error wins.
"""

import numpy as np

from gsca import (FitConfig, LambdaGridSpec, SimParams, bayes_error,
                  diagonal_folds, effective_lambda, gdp, lambda_path,
                  simulate_coupled)

# ---------------------------------------------------------------------------
# simulated problem with a known answer, so CV can be judged against truth
# ---------------------------------------------------------------------------
rng = np.random.default_rng(23)
params = SimParams(I=60, J1=16, J2=40, R=3, snr1=3.0, snr2=3.0, sigma2=1.0,
                   mu1=rng.uniform(-2.0, -1.0, size=16),
                   mu2=rng.standard_normal(40), seed=23)
data, truth = simulate_coupled(params)

# ---------------------------------------------------------------------------
# the fold pattern: balanced, and spread over every row and column
# ---------------------------------------------------------------------------
K = 5
folds = diagonal_folds(data, K, seed=0)
sizes = [int(folds.held_out_mask(k).sum()) for k in range(K)]
print("fold sizes over a %dx%d grid: %s" % (data.I, data.J, sizes))
# every row and every column meets at least two different folds
fold_ids = folds.fold_of_entry
assert all(len(set(row[row >= 0])) >= 2 for row in fold_ids)
assert all(len(set(col[col >= 0])) >= 2 for col in fold_ids.T)

# a fold's fit never gets to see its held-out entries, but the penalty must
# be rescaled for the smaller training set, or it would bite harder there
lam_eff = effective_lambda(10.0, data.n_observed - sizes[0], data.I, data.J)
print("lambda 10 on the full grid ~ %.3f on a %d/%d training set"
      % (lam_eff, data.n_observed - sizes[0], data.n_observed))

# ---------------------------------------------------------------------------
# sweep a descending strength path with K-fold CV at every point
# ---------------------------------------------------------------------------
config = FitConfig(penalty=gdp(1.0, 1.0), eps_f=1e-5, seed=0)
result, refit = lambda_path(data, config, LambdaGridSpec(n_lambda=12),
                            K=K, fold_seed=0)

print("%10s %12s %10s %10s" % ("lambda", "cv error", "cv se", "refit rank"))
for lam, m, s, r in zip(result.lambda_grid, result.cv_mean, result.cv_se,
                        result.rank_refit):
    marker = "  <- best" if lam == result.best_lambda else ""
    print("%10.3f %12.4f %10.4f %10d%s" % (lam, m, s, r, marker))

# ---------------------------------------------------------------------------
# judge the selection against the generating model
# ---------------------------------------------------------------------------
floor = bayes_error(data, folds, truth)
best_idx = int(np.argmin(result.cv_mean))
print("best lambda %.3f: cv error %.4f vs bayes floor %.4f (gap %.4f)"
      % (result.best_lambda, result.cv_mean[best_idx], floor,
         result.cv_mean[best_idx] - floor))
print("refit at best lambda: rank %d (true rank %d), sigma2 %.3f"
      % (result.rank_refit[best_idx], params.R, refit.sigma2))
