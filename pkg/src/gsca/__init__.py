"""Low-rank factorization of coupled binary and quantitative data.

A binary matrix and a quantitative matrix that share their row mode are
modeled through one common parameter matrix: column offsets plus a
column-centered low-rank part. The fit maximizes the joint Bernoulli and
Gaussian likelihood with a concave penalty on the singular values, via a
majorization-minimization loop whose inner step is a weighted singular-value
thresholding. Model selection uses element-wise diagonal K-fold
cross-validation over a penalty-strength path.
"""

__version__ = "0.1.0"

from .likelihood import (LOGIT, PROBIT, CoupledData, binary_nll,
                         binary_nll_grad, inverse_link, joint_nll,
                         lipschitz_bound, quantitative_nll,
                         quantitative_nll_grad)
from .penalties import (PenaltySpec, gdp, has_absorbing_zeros,
                        has_adaptive_weights, lq, nuclear, penalty_value,
                        scad, scalar_prox, supergradient, weighted_svt)
from .solver import (FitConfig, ModelFit, decompose_Z, fit_exact_rank,
                     fit_gsca, fit_path_point, majorization_target, update_mu,
                     update_sigma2, update_Z)
from .evaluation import EvalReport, estimated_rank, evaluate_fit, rmse
from .simulation import (SimGroundTruth, SimParams, benchmark_params,
                         binary_offsets_from_marginals,
                         drop_uninformative_binary_columns,
                         load_reference_marginals,
                         sample_latent_binary_block,
                         sample_marginal_probabilities, sca_full_information,
                         simulate_coupled, subset_binary_columns)
from .model_selection import (CvResult, FoldAssignment, LambdaGridSpec,
                              bayes_error, cv_error, diagonal_folds,
                              effective_lambda, find_lambda_bounds,
                              held_out_nll, lambda_path)

__all__ = [name for name in dir() if not name.startswith("_")]
