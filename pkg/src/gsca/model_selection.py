"""K-fold cross-validation with element-wise diagonal hold-out patterns.

Entries, not rows, are held out: fold k of the data has its entries masked,
the model is fitted on the rest, and the fold's scaled negative
log-likelihood on the held-out entries is the validation error. The
diagonal pattern staggers folds across columns so every row and every
column keeps observations in every training set.

Because the penalty competes with a likelihood that is a sum over observed
entries, the penalty strength is rescaled by the observed fraction before
each fit (effective_lambda); otherwise models fitted on K-1 folds would be
penalized relatively harder than the final full-data fit.
"""

import warnings

import numpy as np
from dataclasses import dataclass, field, replace

from .evaluation import estimated_rank
from .likelihood import binary_nll, quantitative_nll
from .penalties import has_absorbing_zeros
from .solver import fit_gsca, fit_path_point


@dataclass(frozen=True)
class FoldAssignment:
    """Fold index per observed entry (-1 where unobserved), both blocks."""
    fold_of_entry: np.ndarray
    K: int

    def held_out_mask(self, k):
        if not (0 <= k < self.K):
            raise ValueError("fold index out of range")
        return self.fold_of_entry == k


def _tiled_offsets(rng, J, K):
    # concatenated random permutations of 0..K-1, truncated to J columns;
    # keeps per-column offsets as evenly distributed as possible
    reps = -(-J // K)
    return np.concatenate([rng.permutation(K) for _ in range(reps)])[:J]


def fold_matrix(offsets, I, K):
    """Fold of entry (i, j) = (i + offsets[j]) mod K, for a full I-row grid.

    With identity offsets and I = J = K the folds are the K wrapped
    diagonals of the square.
    """
    offsets = np.asarray(offsets, dtype=int)
    return (np.arange(I)[:, None] + offsets[None, :]) % K


def _block_folds(rng, Q, K):
    I, J = Q.shape
    grid = fold_matrix(_tiled_offsets(rng, J, K), I, K)
    return np.where(Q == 1.0, grid, -1), grid


def _block_ok(folds, grid, K):
    # balance is a property of the diagonal pattern itself; the observed
    # counts inherit it exactly when nothing is missing
    counts = np.bincount(grid.ravel(), minlength=K)
    if counts.max() - counts.min() > 1:
        return False
    observed = folds >= 0
    if np.bincount(folds[observed], minlength=K).min() < 1:
        return False  # a fold with nothing to hold out is useless
    # every row/column with observations must spread over >= 2 folds
    for axis in (0, 1):
        lanes = np.swapaxes(folds, 0, axis)
        for lane in lanes:
            vals = lane[lane >= 0]
            if vals.size and vals.min() == vals.max():
                return False
    return True


def diagonal_folds(data, K, seed, max_retries=100):
    """Balanced diagonal-style fold assignment for both blocks.

    Within a block, entry (i, j) lands in fold (i + offset(j)) mod K with
    per-column offsets built from seeded permutations of 0..K-1. Re-draws
    offsets until the pattern's fold sizes per block differ by at most one,
    every fold holds out at least one observed entry, and no observed row
    or column concentrates in a single fold; raises when the mask makes
    that impossible.
    """
    if not (isinstance(K, (int, np.integer)) and 2 <= K):
        raise ValueError("diagonal_folds: K must be an integer >= 2")
    if K > data.Q1.sum() or K > data.Q2.sum():
        raise ValueError("diagonal_folds: more folds than observed entries")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        f1, g1 = _block_folds(rng, data.Q1, K)
        f2, g2 = _block_folds(rng, data.Q2, K)
        if _block_ok(f1, g1, K) and _block_ok(f2, g2, K):
            return FoldAssignment(np.hstack([f1, f2]), int(K))
    raise ValueError("diagonal_folds: no valid assignment in %d tries "
                     "(mask too sparse for K=%d?)" % (max_retries, K))


def effective_lambda(lam, n_observed, I, J):
    """Penalty strength rescaled by the observed fraction of the grid."""
    if not (0 <= n_observed <= I * J):
        raise ValueError("effective_lambda: bad observed count")
    if I < 1 or J < 1:
        raise ValueError("effective_lambda: bad dimensions")
    return lam * n_observed / (I * J)


def held_out_nll(data, held_out, fit, link):
    """Scaled negative log-likelihood on held-out observed entries."""
    j1 = data.J1
    theta = fit.mu + fit.Z
    Qho1 = data.Q1 * held_out[:, :j1]
    Qho2 = data.Q2 * held_out[:, j1:]
    n = Qho1.sum() + Qho2.sum()
    if n < 1:
        raise ValueError("held_out_nll: empty held-out set")
    total = (binary_nll(data.X1, theta[:, :j1], Qho1, link)
             + quantitative_nll(data.X2, theta[:, j1:], Qho2, fit.sigma2))
    return float(total / n)


class _TruthShim:
    # lets held_out_nll score the generating parameters like a fit
    def __init__(self, truth):
        self.mu = truth.mu
        self.Z = truth.Z
        self.sigma2 = truth.sigma2


def bayes_error(data, folds, truth, link="logit"):
    """Mean held-out NLL of the generating parameters over the same folds.

    The floor any fitted model's CV error should be compared against.
    """
    shim = _TruthShim(truth)
    errs = [held_out_nll(data, folds.held_out_mask(k), shim, link)
            for k in range(folds.K)]
    return float(np.mean(errs))


def cv_error(data, folds, lam, config, warm_start=None, collect=None):
    """Cross-validation error of one penalty strength.

    Fits one model per fold on the remaining entries (penalty rescaled via
    effective_lambda), scores the held-out entries, and averages. A fold
    whose fit saturates the noise variance contributes +inf: the model is
    declaring itself degenerate at this lambda, and no finite likelihood is
    available. Returns (mean, se, per_fold_errors, last_unsaturated_fit);
    fold k+1 warm-starts from fold k under the per-family start policy of
    fit_path_point (so scad/gdp folds hedge the warm start against a cold
    fit, and lq with q < 1 always fits cold).

    collect, when given, receives one dict per fold with diagnostics; its
    iterations field counts every start's work on that fold.
    """
    I, J = data.I, data.J
    chain = not has_absorbing_zeros(config.penalty)
    errors = np.empty(folds.K)
    last_fit = None
    warm = warm_start if chain else None
    for k in range(folds.K):
        held = folds.held_out_mask(k)
        train = data.with_held_out(held)
        lam_k = effective_lambda(lam, train.n_observed, I, J)
        fit, fits = fit_path_point(train, config, lam_k, warm)
        if fit.warned_saturated:
            errors[k] = np.inf
            warm = None  # a saturated iterate poisons the next fold
        else:
            errors[k] = held_out_nll(data, held, fit, config.link)
            warm = fit if chain else None
            last_fit = fit
        if collect is not None:
            collect.append({
                "fold": k, "lambda": lam, "effective_lambda": lam_k,
                "error": errors[k],
                "rank": estimated_rank(fit.singular_values),
                "sigma2_hat": fit.sigma2,
                "iterations": sum(f.iterations for f in fits),
                "saturated": fit.warned_saturated,
            })
    finite = np.isfinite(errors)
    mean = float(np.mean(errors))
    se = float(np.std(errors, ddof=1) / np.sqrt(folds.K)) if finite.all() \
        else float("inf")
    return mean, se, errors, last_fit


@dataclass(frozen=True)
class LambdaGridSpec:
    """Grid size and optional explicit bounds for the penalty path."""
    n_lambda: int = 30
    lambda_max: float = None
    lambda_min: float = None
    bounds_eps: float = 1e-2

    def __post_init__(self):
        if self.n_lambda < 1:
            raise ValueError("n_lambda must be >= 1")
        if self.lambda_max is not None and self.lambda_min is not None \
                and not (self.lambda_max >= self.lambda_min > 0):
            raise ValueError("need lambda_max >= lambda_min > 0")


@dataclass(frozen=True)
class CvResult:
    """Per-lambda CV errors and ranks along a descending penalty path."""
    lambda_grid: np.ndarray
    cv_mean: np.ndarray
    cv_se: np.ndarray
    fold_errors: np.ndarray      # n_lambda x K
    rank_cv: np.ndarray          # mean estimated rank over folds
    rank_refit: np.ndarray       # rank of the full-data refit per lambda
    best_lambda: float
    lambda_1se: float
    K: int
    records: list = field(default_factory=list, repr=False)


def _probe_rank(data, config, lam, eps, warm):
    cfg = replace(config, penalty=replace(config.penalty, lam=lam),
                  eps_f=eps, init=warm)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_gsca(data, cfg)
    return estimated_rank(fit.singular_values), fit


def find_lambda_bounds(data, config, eps=1e-2, max_doublings=60):
    """(lambda_max, lambda_min): rank collapses to <= 1 at the top of the
    path and saturates the spectrum (or the noise floor) at the bottom.

    Probes are low-precision fits chained the way a descending path walks
    them: each probe warm-starts from the previous one, except that
    penalties with absorbing zeros (lq, q < 1) are probed cold, matching
    how their paths must be fit. The bounds therefore describe the path
    that will actually be walked, not the behavior of isolated fits.
    """
    cold = has_absorbing_zeros(config.penalty)

    def probe(lam, warm):
        rank, fit = _probe_rank(data, config, lam, eps,
                                None if cold else warm)
        return rank, (None if cold or fit.warned_saturated else fit), fit

    full_rank = min(data.I, data.J) - 1
    lam = 1.0
    rank, warm, _ = probe(lam, None)
    if rank <= 1:
        for _ in range(max_doublings):
            candidate = lam / 2.0
            rank, warm, _ = probe(candidate, warm)
            if rank > 1:
                break
            lam = candidate
        lam_max = lam
    else:
        for _ in range(max_doublings):
            lam *= 2.0
            rank, warm, _ = probe(lam, warm)
            if rank <= 1:
                break
        else:
            raise FloatingPointError("rank never collapsed; data scale off?")
        lam_max = lam
    lam_min = lam_max
    for _ in range(max_doublings):
        lam_min /= 2.0
        rank, warm, fit = probe(lam_min, warm)
        if rank >= full_rank or fit.warned_saturated:
            break
    return lam_max, lam_min


def lambda_path(data, config, grid=None, K=7, fold_seed=0):
    """Descending penalty path with K-fold CV at every grid point.

    Warm starts run down the path through the CV fits and, separately,
    through full-data refits (whose ranks populate rank_refit). After the
    grid, the best (minimum mean CV error) lambda is refitted on the full
    data, initialized from that lambda's last CV fit. Every fit follows
    the per-family start policy of fit_path_point: penalties with
    absorbing zeros (lq, q < 1) ignore warm starts and fit cold, and
    adaptive revivable penalties (scad, gdp) hedge each warm start against
    a cold fit. Returns (CvResult, final_refit). lambda_1se is the largest
    lambda within one standard error of the minimum; selection itself is
    the plain minimum.
    """
    grid = grid if grid is not None else LambdaGridSpec()
    folds = diagonal_folds(data, K, fold_seed)
    lam_max, lam_min = grid.lambda_max, grid.lambda_min
    if lam_max is None or lam_min is None:
        auto_max, auto_min = find_lambda_bounds(data, config, grid.bounds_eps)
        lam_max = lam_max if lam_max is not None else auto_max
        lam_min = lam_min if lam_min is not None else auto_min
    lambdas = np.geomspace(lam_max, lam_min, grid.n_lambda)

    I, J = data.I, data.J
    lam_full_scale = effective_lambda(1.0, data.n_observed, I, J)
    records = []
    cv_mean = np.empty(grid.n_lambda)
    cv_se = np.empty(grid.n_lambda)
    fold_errors = np.empty((grid.n_lambda, folds.K))
    rank_cv = np.empty(grid.n_lambda)
    rank_refit = np.empty(grid.n_lambda, dtype=int)
    cv_fits = [None] * grid.n_lambda

    chain = not has_absorbing_zeros(config.penalty)
    cv_warm = None
    refit_warm = None
    for idx, lam in enumerate(lambdas):
        fold_records = []
        mean, se, errs, last_fit = cv_error(data, folds, lam, config,
                                            warm_start=cv_warm,
                                            collect=fold_records)
        records.extend(fold_records)
        cv_mean[idx], cv_se[idx], fold_errors[idx] = mean, se, errs
        rank_cv[idx] = float(np.mean([r["rank"] for r in fold_records]))
        cv_fits[idx] = last_fit
        cv_warm = last_fit if chain else None

        full_fit, _ = fit_path_point(data, config, lam * lam_full_scale,
                                     refit_warm)
        rank_refit[idx] = estimated_rank(full_fit.singular_values)
        refit_warm = full_fit \
            if chain and not full_fit.warned_saturated else None

    best_idx = int(np.argmin(cv_mean))
    best_lambda = float(lambdas[best_idx])
    within = cv_mean <= cv_mean[best_idx] + cv_se[best_idx]
    lambda_1se = float(lambdas[np.argmax(within)])  # grid is descending

    refit, _ = fit_path_point(data, config, best_lambda * lam_full_scale,
                              cv_fits[best_idx] if chain else None)

    result = CvResult(lambda_grid=lambdas, cv_mean=cv_mean, cv_se=cv_se,
                      fold_errors=fold_errors, rank_cv=rank_cv,
                      rank_refit=rank_refit, best_lambda=best_lambda,
                      lambda_1se=lambda_1se, K=folds.K, records=records)
    return result, refit
