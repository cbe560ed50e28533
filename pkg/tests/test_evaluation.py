import numpy as np
import pytest

from gsca.evaluation import rmse, estimated_rank, evaluate_fit
from gsca.simulation import simulate_coupled, SimParams, sca_full_information
from gsca.solver import ModelFit, decompose_Z

rng = np.random.default_rng(42)


class TestRmse:
    def test_zero_when_exact(self):
        T = rng.normal(size=(5, 4))
        assert rmse(T, T.copy()) == 0.0

    def test_doubling_gives_one(self):
        T = rng.normal(size=(6, 3))
        np.testing.assert_allclose(rmse(T, 2.0 * T), 1.0, rtol=1e-12)

    def test_is_squared_frobenius_ratio(self):
        T = rng.normal(size=(4, 7))
        E = rng.normal(size=(4, 7))
        np.testing.assert_allclose(rmse(T, T + E),
                                   np.sum(E ** 2) / np.sum(T ** 2),
                                   rtol=1e-12)

    def test_rejects_zero_reference_and_shape_mismatch(self):
        with pytest.raises(ValueError):
            rmse(np.zeros((2, 2)), np.ones((2, 2)))
        with pytest.raises(ValueError):
            rmse(np.ones((2, 2)), np.ones((2, 3)))

    def test_accepts_vectors(self):
        v = np.array([3.0, 4.0])
        np.testing.assert_allclose(rmse(v, v + np.array([0.0, 5.0])), 1.0)


class TestEstimatedRank:
    def test_counts_relative_to_largest(self):
        assert estimated_rank(np.array([1.0, 1e-6, 1e-9])) == 2
        assert estimated_rank(np.array([1.0, 1e-8])) == 1
        assert estimated_rank(np.array([5.0, 3.0, 2.0])) == 3

    def test_zero_and_empty(self):
        assert estimated_rank(np.zeros(4)) == 0
        assert estimated_rank(np.array([])) == 0

    def test_custom_tolerance(self):
        s = np.array([2.0, 1e-3])
        assert estimated_rank(s, rank_tol=1e-2) == 1
        assert estimated_rank(s, rank_tol=1e-5) == 2


def small_truth(seed=0):
    p = SimParams(I=30, J1=5, J2=7, R=2, snr1=2.0, snr2=2.0, sigma2=1.0,
                  mu1=np.linspace(-1.5, -0.5, 5),
                  mu2=np.linspace(-1.0, 1.0, 7), seed=seed)
    return simulate_coupled(p)


class TestEvaluateFit:
    def test_perfect_fit_scores_zero(self):
        _, t = small_truth()
        sv = np.linalg.svd(t.Z, compute_uv=False)
        A, B1, B2 = decompose_Z(t.Z, t.J1)
        fit = ModelFit(mu=t.mu, Z=t.Z, sigma2=t.sigma2, singular_values=sv,
                       A=A, B1=B1, B2=B2, loss_trace=np.array([0.0]),
                       iterations=0, converged=True, warned_saturated=False)
        rep = evaluate_fit(fit, t)
        # mu + Z re-associates the additions that built Theta, so the
        # score is ulp-level rather than exactly zero
        assert rep.rmse_theta < 1e-30
        assert rep.rmse_z == 0.0
        assert rep.rmse_mu == 0.0
        assert rep.rank == 2
        assert rep.sigma2_hat == t.sigma2

    def test_block_split_is_pythagorean(self):
        _, t = small_truth(seed=1)
        fit = sca_full_information(t.Theta1 + 0.1, t.Theta2 - 0.2, R=2)
        rep = evaluate_fit(fit, t)
        total = rep.rmse_theta * np.sum(t.Theta ** 2)
        parts = (rep.rmse_theta1 * np.sum(t.Theta1 ** 2)
                 + rep.rmse_theta2 * np.sum(t.Theta2 ** 2))
        np.testing.assert_allclose(total, parts, rtol=1e-10)

    def test_to_dict_roundtrip(self):
        _, t = small_truth(seed=2)
        fit = sca_full_information(t.Theta1, t.Theta2, R=2)
        d = evaluate_fit(fit, t).to_dict()
        assert set(d) == {"rmse_theta", "rmse_theta1", "rmse_theta2",
                          "rmse_mu", "rmse_z", "rmse_z1", "rmse_z2",
                          "rank", "sigma2_hat"}
        assert isinstance(d["rank"], int)
