"""Recovery metrics against simulated ground truth."""

import numpy as np
from dataclasses import dataclass


def rmse(truth, estimate):
    """Relative squared error ||T - That||_F^2 / ||T||_F^2.

    Note the square: a perfect estimate gives 0, and estimate = 2*T gives 1.
    """
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise ValueError("rmse: shape mismatch")
    denom = np.sum(truth * truth)
    if denom == 0.0:
        raise ValueError("rmse: reference is identically zero")
    diff = truth - estimate
    return float(np.sum(diff * diff) / denom)


def estimated_rank(singular_values, rank_tol=1e-7):
    """Number of singular values above rank_tol times the largest one."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or np.max(s) <= 0.0:
        return 0
    return int(np.sum(s > rank_tol * np.max(s)))


@dataclass(frozen=True)
class EvalReport:
    """Blockwise recovery errors of one fit against one ground truth."""
    rmse_theta: float
    rmse_theta1: float
    rmse_theta2: float
    rmse_mu: float
    rmse_z: float
    rmse_z1: float
    rmse_z2: float
    rank: int
    sigma2_hat: float

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def evaluate_fit(fit, truth, rank_tol=1e-7):
    """Score a fitted model against simulated ground truth.

    truth provides Theta1, Theta2, mu, Z (deflated, column-centered); the
    binary block width is read off truth.Theta1.
    """
    j1 = truth.Theta1.shape[1]
    theta_hat = fit.mu + fit.Z
    theta_true = np.hstack([truth.Theta1, truth.Theta2])
    return EvalReport(
        rmse_theta=rmse(theta_true, theta_hat),
        rmse_theta1=rmse(truth.Theta1, theta_hat[:, :j1]),
        rmse_theta2=rmse(truth.Theta2, theta_hat[:, j1:]),
        rmse_mu=rmse(truth.mu, fit.mu),
        rmse_z=rmse(truth.Z, fit.Z),
        rmse_z1=rmse(truth.Z[:, :j1], fit.Z[:, :j1]),
        rmse_z2=rmse(truth.Z[:, j1:], fit.Z[:, j1:]),
        rank=estimated_rank(fit.singular_values, rank_tol),
        sigma2_hat=float(fit.sigma2),
    )
