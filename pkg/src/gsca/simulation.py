"""Ground-truth generators for coupled binary/quantitative benchmarks.

The common low-rank structure is built from orthonormalized Gaussian factor
matrices and a shared, descending positive diagonal; per-block scale factors
are then solved so that each block hits a requested signal-to-noise ratio

    snr = ||structure||_F^2 / E ||noise||_F^2,

where the noise energy is the expected one by default: I*J1*pi^2/3 for the
binary block (variance of the standard logistic that a logit-Bernoulli draw
integrates over) and I*J2*sigma2 for the quantitative block. The binary
block is then sampled entrywise Bernoulli through the logit link; the
quantitative block gets additive Gaussian noise. Column means of the
structure are deflated into the offset so the centered part has exactly
zero column sums while Theta is untouched.
"""

from importlib import resources

import numpy as np
from dataclasses import dataclass, replace

from .likelihood import LOGIT, CoupledData, inverse_link
from .solver import ModelFit, decompose_Z

LOGISTIC_VARIANCE = np.pi ** 2 / 3.0


@dataclass(frozen=True)
class SimParams:
    """Dimensions, rank, target SNRs, noise variance, offsets, seed.

    realized_noise switches the quantitative-block SNR denominator from the
    expected noise energy to the energy of the actually sampled noise
    matrix. The binary block has no realizable noise matrix (the draw is
    Bernoulli), so its denominator is always the expected one.
    """
    I: int
    J1: int
    J2: int
    R: int
    snr1: float
    snr2: float
    sigma2: float
    mu1: np.ndarray
    mu2: np.ndarray
    seed: int
    realized_noise: bool = False

    def __post_init__(self):
        if self.I < 2 or self.J1 < 1 or self.J2 < 1:
            raise ValueError("SimParams: need I >= 2 and nonempty blocks")
        if not (1 <= self.R <= min(self.I, self.J1, self.J2)):
            raise ValueError("SimParams: R must be in [1, min(I, J1, J2)]")
        if not (self.snr1 > 0 and self.snr2 > 0):
            raise ValueError("SimParams: SNRs must be positive")
        if not (self.sigma2 > 0):
            raise ValueError("SimParams: sigma2 must be positive")
        mu1 = np.asarray(self.mu1, dtype=float)
        mu2 = np.asarray(self.mu2, dtype=float)
        if mu1.shape != (self.J1,) or mu2.shape != (self.J2,):
            raise ValueError("SimParams: offset length mismatch")
        if not (np.all(np.isfinite(mu1)) and np.all(np.isfinite(mu2))):
            raise ValueError("SimParams: offsets must be finite")
        object.__setattr__(self, "mu1", mu1)
        object.__setattr__(self, "mu2", mu2)


@dataclass(frozen=True)
class SimGroundTruth:
    """Everything needed to score an estimate of the simulated model."""
    params: SimParams
    U: np.ndarray
    D: np.ndarray          # unscaled shared diagonal, descending
    V1: np.ndarray
    V2: np.ndarray
    c1: float
    c2: float
    mu: np.ndarray         # offsets after deflation, length J1+J2
    Z: np.ndarray          # centered structure, I x (J1+J2)
    Theta1: np.ndarray
    Theta2: np.ndarray
    realized_snr1: float
    realized_snr2: float

    @property
    def sigma2(self):
        return self.params.sigma2

    @property
    def J1(self):
        return self.Theta1.shape[1]

    @property
    def Theta(self):
        return np.hstack([self.Theta1, self.Theta2])


def _orthonormal(rng, n, r):
    # QR of a Gaussian draw; resample the measure-zero degenerate case
    for _ in range(5):
        G = rng.standard_normal((n, r))
        Qmat, Rmat = np.linalg.qr(G)
        if np.all(np.abs(np.diag(Rmat)) > 0):
            return Qmat
    raise FloatingPointError("orthonormal factor draw kept degenerating")


def simulate_coupled(params):
    """Sample one coupled data set; returns (CoupledData, SimGroundTruth)."""
    rng = np.random.default_rng(params.seed)
    I, J1, J2, R = params.I, params.J1, params.J2, params.R

    U = _orthonormal(rng, I, R)
    V1 = _orthonormal(rng, J1, R)
    V2 = _orthonormal(rng, J2, R)
    D = np.sort(np.abs(rng.standard_normal(R)))[::-1]
    noise2 = np.sqrt(params.sigma2) * rng.standard_normal((I, J2))
    uniforms = rng.uniform(size=(I, J1))

    d_energy = float(np.sum(D * D))
    c1 = np.sqrt(params.snr1 * I * J1 * LOGISTIC_VARIANCE / d_energy)
    noise2_energy = float(np.sum(noise2 * noise2)) if params.realized_noise \
        else I * J2 * params.sigma2
    c2 = np.sqrt(params.snr2 * noise2_energy / d_energy)

    struct1 = (U * (c1 * D)) @ V1.T
    struct2 = (U * (c2 * D)) @ V2.T
    Theta1 = params.mu1 + struct1
    Theta2 = params.mu2 + struct2

    X1 = (uniforms < inverse_link(Theta1, LOGIT)).astype(float)
    X2 = Theta2 + noise2

    # push column means of the structure into the offset; Theta is unchanged
    structure = np.hstack([struct1, struct2])
    col_means = structure.mean(axis=0)
    mu = np.concatenate([params.mu1, params.mu2]) + col_means
    Z = structure - col_means

    truth = SimGroundTruth(
        params=params, U=U, D=D, V1=V1, V2=V2, c1=float(c1), c2=float(c2),
        mu=mu, Z=Z, Theta1=Theta1, Theta2=Theta2,
        realized_snr1=float(np.sum(struct1 * struct1) / (I * J1 * LOGISTIC_VARIANCE)),
        realized_snr2=float(np.sum(struct2 * struct2) / np.sum(noise2 * noise2)),
    )
    data = CoupledData(X1, X2, np.ones_like(X1), np.ones_like(X2))
    return data, truth


# === offsets ===

def sample_marginal_probabilities(J1, seed):
    """Skewed marginal one-probabilities, Beta(2, 28) (mean about 0.0666)."""
    rng = np.random.default_rng(seed)
    return rng.beta(2.0, 28.0, size=J1)


def load_reference_marginals():
    """The 410 shipped marginal probabilities used at benchmark scale."""
    path = resources.files("gsca") / "data" / "cna_like_marginals.csv"
    with path.open() as fh:
        header = fh.readline().strip()
        if header != "marginal_prob":
            raise ValueError("unexpected marginals file header %r" % header)
        vals = np.array([float(line) for line in fh])
    return vals


def binary_offsets_from_marginals(marginals, I):
    """Logit of marginal probabilities, clamped away from 0/1 by 1/(2I)."""
    p = np.clip(np.asarray(marginals, dtype=float), 1.0 / (2 * I), 1.0 - 1.0 / (2 * I))
    return np.log(p / (1.0 - p))


def benchmark_params(seed, I=160, J1=410, J2=1000, R=10, snr1=1.0, snr2=1.0,
                     sigma2=1.0, realized_noise=False):
    """Benchmark-scale SimParams: imbalanced binary offsets, Gaussian mu2.

    The binary offsets come from the shipped marginals when J1 matches their
    length, otherwise from a fresh Beta(2, 28) draw. mu2 is standard normal.
    Both use an offset-specific stream so they never overlap the draws
    inside simulate_coupled.
    """
    marginals = load_reference_marginals() if J1 == 410 \
        else sample_marginal_probabilities(J1, [seed, 2])
    mu1 = binary_offsets_from_marginals(marginals, I)
    mu2 = np.random.default_rng([seed, 1]).standard_normal(J2)
    return SimParams(I=I, J1=J1, J2=J2, R=R, snr1=snr1, snr2=snr2,
                     sigma2=sigma2, mu1=mu1, mu2=mu2, seed=seed,
                     realized_noise=realized_noise)


# === post-processing and baselines ===

def drop_uninformative_binary_columns(X1, Q1):
    """Remove binary columns whose observed entries are all identical.

    Returns (X1_kept, Q1_kept, kept_indices). A column with no observed
    entries is uninformative too and is dropped.
    """
    X1 = np.asarray(X1, dtype=float)
    Q1 = np.asarray(Q1, dtype=float)
    kept = []
    for j in range(X1.shape[1]):
        vals = X1[Q1[:, j] == 1.0, j]
        if vals.size and vals.min() != vals.max():
            kept.append(j)
    kept = np.array(kept, dtype=int)
    return X1[:, kept], Q1[:, kept], kept


def subset_binary_columns(truth, kept):
    """Ground truth restricted to a subset of binary columns.

    Keeps evaluation aligned after drop_uninformative_binary_columns: the
    same columns disappear from Theta1, the centered structure, the offsets,
    and the binary loadings.
    """
    kept = np.asarray(kept, dtype=int)
    j1 = truth.J1
    Z = np.hstack([truth.Z[:, :j1][:, kept], truth.Z[:, j1:]])
    mu = np.concatenate([truth.mu[:j1][kept], truth.mu[j1:]])
    return replace(truth, Theta1=truth.Theta1[:, kept], V1=truth.V1[kept],
                   mu=mu, Z=Z)


def sample_latent_binary_block(truth, seed):
    """Underlying continuous version of the binary block: Theta1 plus
    standard logistic noise. This is the only place that noise is realized;
    the regular simulation integrates it out through the Bernoulli draw."""
    rng = np.random.default_rng(seed)
    return truth.Theta1 + rng.logistic(size=truth.Theta1.shape)


def sca_full_information(X1_star, X2, R):
    """Rank-R least-squares baseline on fully observed continuous blocks.

    Column-centers the concatenation, keeps the top R singular components as
    the centered structure, and reports the column means as offsets. Packed
    into a ModelFit (sigma2 is NaN: this baseline has no noise model).
    """
    X1_star = np.asarray(X1_star, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    if X1_star.shape[0] != X2.shape[0]:
        raise ValueError("sca_full_information: row mismatch")
    if not (1 <= R <= min(X1_star.shape[0], X1_star.shape[1] + X2.shape[1])):
        raise ValueError("sca_full_information: bad rank")
    X = np.hstack([X1_star, X2])
    mu = X.mean(axis=0)
    U, s, Vt = np.linalg.svd(X - mu, full_matrices=False)
    sv = np.zeros_like(s)
    sv[:R] = s[:R]
    Z = (U[:, :R] * s[:R]) @ Vt[:R]
    A, B1, B2 = decompose_Z(Z, X1_star.shape[1])
    return ModelFit(mu=mu, Z=Z, sigma2=float("nan"), singular_values=sv,
                    A=A, B1=B1, B2=B2, loss_trace=np.array([]), iterations=0,
                    converged=True, warned_saturated=False)
