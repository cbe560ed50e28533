"""Link functions and negative log-likelihoods for coupled binary/quantitative data.

A binary matrix and a quantitative matrix share a common row mode. The binary
block is Bernoulli with success probability phi(theta) entrywise (logit or
probit link); the quantitative block is Gaussian with a single noise variance.
Missing entries are carried as 0/1 weight masks, never as sentinel values, so
every sum below is over observed entries only.
"""

import numpy as np
from dataclasses import dataclass
from scipy.special import expit, log_ndtr, ndtr

LOGIT = "logit"
PROBIT = "probit"
LINKS = (LOGIT, PROBIT)

# probabilities are kept this far inside (0, 1) before any log
PROB_EPS = 1e-12

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _check_link(link):
    if link not in LINKS:
        raise ValueError("unknown link %r, expected one of %s" % (link, LINKS))


def inverse_link(theta, link=LOGIT):
    """Map natural parameters to Bernoulli probabilities.

    Parameters
    ----------
    theta : array_like
        Natural-parameter values; any shape, must be finite.
    link : str
        "logit" (standard logistic cdf) or "probit" (standard normal cdf).

    Returns
    -------
    ndarray
        Probabilities clamped into [PROB_EPS, 1 - PROB_EPS], so downstream
        logs and ratios stay finite even for |theta| in the hundreds.
    """
    _check_link(link)
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("inverse_link: non-finite natural parameters")
    p = expit(theta) if link == LOGIT else ndtr(theta)
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def binary_nll(X, Theta, Q, link=LOGIT):
    """Masked Bernoulli negative log-likelihood of a binary block.

    Computed in log-sum-exp form, not through the probabilities, so it is
    exact for natural parameters far into the tails.
    """
    _check_link(link)
    X = np.asarray(X, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if link == LOGIT:
        # -[x log phi + (1-x) log(1-phi)] = softplus(theta) - x*theta
        per_entry = np.logaddexp(0.0, Theta) - X * Theta
    else:
        per_entry = -(X * log_ndtr(Theta) + (1.0 - X) * log_ndtr(-Theta))
    return float(np.sum(Q * per_entry))


def quantitative_nll(X, Theta, Q, sigma2):
    """Masked Gaussian negative log-likelihood, including the variance term.

    Returns 0.5/sigma2 * sum of squared observed residuals plus
    n_observed/2 * log(2*pi*sigma2).
    """
    if not (sigma2 > 0):
        raise ValueError("quantitative_nll: sigma2 must be positive")
    X = np.asarray(X, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    Q = np.asarray(Q, dtype=float)
    resid = Q * (X - Theta)
    n_obs = Q.sum()
    return float(0.5 / sigma2 * np.sum(resid * resid)
                 + 0.5 * n_obs * np.log(2.0 * np.pi * sigma2))


def joint_nll(data, Theta, sigma2, link=LOGIT):
    """Sum of the two block likelihoods at a common parameter matrix.

    Theta has the blocks side by side, binary columns first.
    """
    j1 = data.J1
    return (binary_nll(data.X1, Theta[:, :j1], data.Q1, link)
            + quantitative_nll(data.X2, Theta[:, j1:], data.Q2, sigma2))


def binary_nll_grad(X, Theta, Q, link=LOGIT):
    """Gradient of binary_nll with respect to Theta (zero on masked entries).

    Logit: Q * (phi(Theta) - X). Probit: the pdf-over-cdf form, evaluated in
    log space per branch of x so it stays finite in the tails.
    """
    _check_link(link)
    X = np.asarray(X, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if link == LOGIT:
        return Q * (expit(Theta) - X)
    log_pdf = -0.5 * Theta * Theta - _LOG_SQRT_2PI
    # x = 1: -pdf/Phi(theta);  x = 0: pdf/Phi(-theta)
    g = np.where(X > 0.5,
                 -np.exp(log_pdf - log_ndtr(Theta)),
                 np.exp(log_pdf - log_ndtr(-Theta)))
    return Q * g


def quantitative_nll_grad(X, Theta, Q, sigma2):
    """Gradient of quantitative_nll with respect to Theta: Q*(Theta - X)/sigma2."""
    if not (sigma2 > 0):
        raise ValueError("quantitative_nll_grad: sigma2 must be positive")
    X = np.asarray(X, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return Q * (Theta - X) / sigma2


def lipschitz_bound(link, sigma2):
    """Upper bound on the largest entrywise curvature of the joint likelihood.

    The Bernoulli part contributes 1/4 under the logit link and 1 under the
    probit link; the Gaussian part contributes 1/sigma2. The bound is the max
    of the two, so a single scalar majorizes every entry of the Hessian
    diagonal.
    """
    _check_link(link)
    if not (sigma2 > 0):
        raise ValueError("lipschitz_bound: sigma2 must be positive")
    binary_curv = 0.25 if link == LOGIT else 1.0
    return max(binary_curv, 1.0 / sigma2)


# === data container ===

@dataclass(frozen=True)
class CoupledData:
    """Binary block X1 (I x J1), quantitative block X2 (I x J2), weight masks.

    X1/X2 hold 0.0 at masked entries; Q1/Q2 are float 0/1 arrays. All
    likelihood code multiplies by the mask, so the stored value at a masked
    position never influences a fit.
    """
    X1: np.ndarray
    X2: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray

    def __post_init__(self):
        X1, X2, Q1, Q2 = (np.asarray(a, dtype=float)
                          for a in (self.X1, self.X2, self.Q1, self.Q2))
        if X1.ndim != 2 or X2.ndim != 2:
            raise ValueError("CoupledData: blocks must be 2-d")
        if X1.shape[0] != X2.shape[0]:
            raise ValueError("CoupledData: blocks must share the row mode")
        if X1.shape[0] < 2:
            raise ValueError("CoupledData: need at least 2 rows")
        if X1.shape[1] < 1 or X2.shape[1] < 1:
            raise ValueError("CoupledData: each block needs at least 1 column")
        if Q1.shape != X1.shape or Q2.shape != X2.shape:
            raise ValueError("CoupledData: mask shape mismatch")
        for Q in (Q1, Q2):
            if not np.all((Q == 0.0) | (Q == 1.0)):
                raise ValueError("CoupledData: masks must be 0/1")
        if not (np.all(np.isfinite(X1[Q1 == 1.0])) and np.all(np.isfinite(X2[Q2 == 1.0]))):
            raise ValueError("CoupledData: non-finite observed entries")
        ones = X1[Q1 == 1.0]
        if not np.all((ones == 0.0) | (ones == 1.0)):
            raise ValueError("CoupledData: observed binary entries must be 0 or 1")
        if Q2.sum() < 1:
            raise ValueError("CoupledData: quantitative block has no observed entries")
        Qall = np.hstack([Q1, Q2])
        if np.any(Qall.sum(axis=1) == 0):
            raise ValueError("CoupledData: a row has no observed entries")
        if np.any(Q1.sum(axis=0) == 0) or np.any(Q2.sum(axis=0) == 0):
            raise ValueError("CoupledData: a column has no observed entries")
        # zero out whatever sits under the mask, then freeze private copies
        X1 = np.where(Q1 == 1.0, X1, 0.0)
        X2 = np.where(Q2 == 1.0, X2, 0.0)
        for name, a in (("X1", X1), ("X2", X2), ("Q1", Q1.copy()), ("Q2", Q2.copy())):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_arrays(cls, X1, X2):
        """Build from raw arrays, treating NaN as missing."""
        X1 = np.asarray(X1, dtype=float)
        X2 = np.asarray(X2, dtype=float)
        Q1 = np.where(np.isnan(X1), 0.0, 1.0)
        Q2 = np.where(np.isnan(X2), 0.0, 1.0)
        return cls(np.nan_to_num(X1, nan=0.0), np.nan_to_num(X2, nan=0.0), Q1, Q2)

    @property
    def I(self):
        return self.X1.shape[0]

    @property
    def J1(self):
        return self.X1.shape[1]

    @property
    def J2(self):
        return self.X2.shape[1]

    @property
    def J(self):
        return self.J1 + self.J2

    @property
    def n_observed(self):
        return int(self.Q1.sum() + self.Q2.sum())

    def with_held_out(self, held_out):
        """Copy with additional entries masked (held_out: bool I x (J1+J2)).

        Held-out positions keep their stored values but get weight 0, so
        a fit on the result is bit-for-bit independent of them.
        """
        held_out = np.asarray(held_out, dtype=bool)
        if held_out.shape != (self.I, self.J):
            raise ValueError("with_held_out: mask shape mismatch")
        j1 = self.J1
        Q1 = np.where(held_out[:, :j1], 0.0, self.Q1)
        Q2 = np.where(held_out[:, j1:], 0.0, self.Q2)
        return CoupledData(self.X1, self.X2, Q1, Q2)
