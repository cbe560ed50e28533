"""Majorization-minimization solver for the coupled low-rank model.

The parameter matrix is Theta = 1*mu' + Z with column-centered Z. Each
iteration majorizes the joint likelihood by an entrywise quadratic at the
current iterate (curvature bound from lipschitz_bound), which turns the step
into one weighted singular-value thresholding of the column-centered
majorization target, followed by a closed-form noise-variance update. The
objective (likelihood plus penalty at the current spectrum) never increases.
"""

import warnings

import numpy as np
from dataclasses import dataclass, replace

from .likelihood import (LOGIT, CoupledData, binary_nll, binary_nll_grad,
                         lipschitz_bound, quantitative_nll,
                         quantitative_nll_grad)
from .penalties import (PenaltySpec, has_absorbing_zeros,
                        has_adaptive_weights, penalty_value, supergradient,
                        weighted_svt)


@dataclass(frozen=True)
class FitConfig:
    """Solver settings shared by the penalized and exact-rank fits.

    init accepts None (seeded random start: Z entries uniform on [0, 1),
    mu = 0, sigma2 = 1), a ModelFit, or a (mu, Z, sigma2) triple. eps_f is
    the relative objective decrease below which the fit stops; sigma2_floor
    stops fits that are about to saturate the quantitative block.
    """
    penalty: PenaltySpec = None
    link: str = LOGIT
    eps_f: float = 1e-8
    max_iter: int = 10000
    sigma2_floor: float = 0.05
    seed: int = 0
    init: object = None

    def __post_init__(self):
        if not (self.eps_f > 0):
            raise ValueError("eps_f must be positive")
        if not (isinstance(self.max_iter, (int, np.integer)) and self.max_iter >= 1):
            raise ValueError("max_iter must be a positive integer")
        if not (self.sigma2_floor >= 0):
            raise ValueError("sigma2_floor must be >= 0")


@dataclass(frozen=True)
class ModelFit:
    """Fitted offsets, centered low-rank part, and bookkeeping.

    singular_values are the exact spectrum of Z as constructed (thresholded
    values are exact zeros). A, B1, B2 come from decompose_Z; sign and
    rotation are as produced, no canonicalization.
    """
    mu: np.ndarray
    Z: np.ndarray
    sigma2: float
    singular_values: np.ndarray
    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    loss_trace: np.ndarray
    iterations: int
    converged: bool
    warned_saturated: bool

    @property
    def Theta(self):
        return self.mu + self.Z


def majorization_target(data, Theta, sigma2, link=LOGIT):
    """Point the quadratic majorizer is centered on: Theta - (Q*grad)/L.

    Missing entries take a pure "keep the current value" step, which is what
    lets the thresholding update ignore them.
    """
    j1 = data.J1
    L = lipschitz_bound(link, sigma2)
    G1 = binary_nll_grad(data.X1, Theta[:, :j1], data.Q1, link)
    G2 = quantitative_nll_grad(data.X2, Theta[:, j1:], data.Q2, sigma2)
    return Theta - np.hstack([G1, G2]) / L


def update_mu(H):
    """Offset update: column means of the majorization target."""
    return np.asarray(H, dtype=float).mean(axis=0)


def update_Z(H, spec, prev_singular_values, L):
    """Low-rank update: weighted SVT of the column-centered target.

    Weights are the penalty supergradient at the previous iterate's spectrum;
    the threshold for component r is supergradient_r / L.
    """
    H = np.asarray(H, dtype=float)
    Hc = H - H.mean(axis=0)
    w = supergradient(spec, prev_singular_values)
    return weighted_svt(Hc, w, 1.0 / L)


def update_sigma2(X2, Theta2, Q2):
    """Noise-variance update: mean squared observed residual."""
    Q2 = np.asarray(Q2, dtype=float)
    resid = Q2 * (np.asarray(X2, dtype=float) - np.asarray(Theta2, dtype=float))
    n_obs = Q2.sum()
    if n_obs < 1:
        raise ValueError("update_sigma2: no observed quantitative entries")
    return float(np.sum(resid * resid) / n_obs)


def decompose_Z(Z, j1, rank_tol=1e-7):
    """Split Z into row scores A and block loadings B1, B2.

    Keeps the R singular components with s > rank_tol * s_max. Scores satisfy
    A'A = I * identity (I = number of rows), so loadings carry the scale:
    Z ~= A @ np.vstack([B1, B2]).T with B1 the binary-block rows.
    """
    Z = np.asarray(Z, dtype=float)
    n_rows = Z.shape[0]
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    A = np.sqrt(n_rows) * U[:, :rank]
    B = Vt[:rank].T * (s[:rank] / np.sqrt(n_rows))
    return A, B[:j1], B[j1:]


def fit_gsca(data, config):
    """Penalized maximum-likelihood fit of the coupled low-rank model."""
    if config.penalty is None:
        raise ValueError("fit_gsca: config.penalty is required")
    return _run_mm(data, config, spec=config.penalty, exact_rank=None)


def fit_exact_rank(data, R, config):
    """Unpenalized fit constrained to rank R (hard truncation each step)."""
    if not (isinstance(R, (int, np.integer)) and R >= 1):
        raise ValueError("fit_exact_rank: R must be a positive integer")
    if R >= min(data.I, data.J):
        raise ValueError("fit_exact_rank: R must be below min(I, J)")
    return _run_mm(data, config, spec=None, exact_rank=int(R))


def fit_path_point(data, config, lam, warm=None):
    """One fit at penalty strength lam under the per-family start policy.

    How a descending penalty path should initialize each point depends on
    how the penalty treats components absent from the starting iterate:

    * non-adaptive (nuclear): use the warm start alone. The subproblem has
      a unique optimum, so the start only changes the iteration count.
    * absorbing zeros (lq, q < 1): fit cold. The weight on a zeroed
      component is infinite, so warm-starting would lock in every deletion
      made at stronger penalties.
    * adaptive, revivable (scad, gdp): fit from the warm start AND cold,
      keeping whichever unsaturated fit reaches the lower penalized
      objective. Each start has its own failure mode -- a warm chain can
      refuse to grow rank, a cold start can fail to birth components whose
      signal is weak against the random spectrum -- and the objective
      picks the one that escaped.

    Saturated fits never win while an unsaturated alternative exists (a
    fit stopped at the noise-variance floor has no comparable likelihood).
    Fit warnings are suppressed; inspect warned_saturated instead. Returns
    (chosen_fit, all_fits) with all_fits holding every start's fit so
    callers can account for total work.
    """
    spec = replace(config.penalty, lam=float(lam))
    if has_absorbing_zeros(spec):
        starts = [None]
    elif warm is not None and has_adaptive_weights(spec):
        starts = [warm, None]
    else:
        starts = [warm]
    fits = []
    for init in starts:
        cfg = replace(config, penalty=spec, init=init)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fits.append(fit_gsca(data, cfg))
    live = [f for f in fits if not f.warned_saturated]
    chosen = min(live, key=lambda f: f.loss_trace[-1]) if live else fits[0]
    return chosen, fits


def _initial_state(data, config):
    if config.init is None:
        rng = np.random.default_rng(config.seed)
        Z = rng.uniform(size=(data.I, data.J))
        mu = np.zeros(data.J)
        sigma2 = 1.0
    else:
        init = config.init
        if isinstance(init, ModelFit):
            mu, Z, sigma2 = init.mu, init.Z, init.sigma2
        else:
            mu, Z, sigma2 = init
        mu = np.array(mu, dtype=float)
        Z = np.array(Z, dtype=float)
        sigma2 = float(sigma2)
        if Z.shape != (data.I, data.J) or mu.shape != (data.J,):
            raise ValueError("warm start shape mismatch")
        if not (sigma2 > 0):
            raise ValueError("warm start sigma2 must be positive")
    return mu, Z, sigma2


def _run_mm(data, config, spec, exact_rank):
    if not isinstance(data, CoupledData):
        raise TypeError("expected CoupledData")
    j1 = data.J1
    link = config.link

    mu, Z, sigma2 = _initial_state(data, config)
    sv = np.linalg.svd(Z, compute_uv=False)
    theta = mu + Z

    def objective(theta, sigma2, sv):
        f = (binary_nll(data.X1, theta[:, :j1], data.Q1, link)
             + quantitative_nll(data.X2, theta[:, j1:], data.Q2, sigma2))
        if spec is not None:
            f += float(np.sum(penalty_value(spec, sv)))
        return f

    trace = [objective(theta, sigma2, sv)]
    converged = False
    saturated = False

    for _ in range(config.max_iter):
        H = majorization_target(data, theta, sigma2, link)
        mu = H.mean(axis=0)
        Hc = H - mu
        if exact_rank is None:
            w = supergradient(spec, sv)
            L = lipschitz_bound(link, sigma2)
            Z, _, sv, _ = weighted_svt(Hc, w, 1.0 / L, return_factors=True)
        else:
            U, s, Vt = np.linalg.svd(Hc, full_matrices=False)
            sv = np.zeros_like(s)
            sv[:exact_rank] = s[:exact_rank]
            Z = (U[:, :exact_rank] * s[:exact_rank]) @ Vt[:exact_rank]
        theta = mu + Z
        sigma2 = update_sigma2(data.X2, theta[:, j1:], data.Q2)
        if not (sigma2 > 0):
            raise FloatingPointError("noise variance collapsed to zero")
        trace.append(objective(theta, sigma2, sv))
        if not np.isfinite(trace[-1]):
            raise FloatingPointError("objective became non-finite")
        if sigma2 < config.sigma2_floor:
            saturated = True
            warnings.warn(
                "noise variance %.3g fell below the floor %.3g; the "
                "quantitative block is close to saturation, stopping"
                % (sigma2, config.sigma2_floor))
            break
        if (trace[-2] - trace[-1]) / abs(trace[-2]) <= config.eps_f:
            converged = True
            break

    A, B1, B2 = decompose_Z(Z, j1)
    return ModelFit(mu=mu, Z=Z, sigma2=sigma2, singular_values=sv,
                    A=A, B1=B1, B2=B2, loss_trace=np.asarray(trace),
                    iterations=len(trace) - 1, converged=converged,
                    warned_saturated=saturated)
