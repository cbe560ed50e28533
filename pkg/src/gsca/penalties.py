"""Concave singular-value penalties and their thresholding operators.

Each penalty is a concave, nondecreasing function of a single nonnegative
singular value, with the regularization strength folded into the formula.
The supergradient at the previous iterate supplies per-singular-value
weights, and one weighted soft-thresholding of the SVD then solves the
majorized subproblem exactly (weights nondecreasing along the spectrum,
which concavity guarantees).

Families
--------
nuclear   lam * eta                       (convex reference point)
lq        lam * eta**q, 0 < q <= 1        (nuclear at q = 1)
scad      quadratic blend, flat above gamma*lam, gamma > 2
gdp       lam * log(1 + eta/gamma), gamma > 0
"""

import numpy as np
from dataclasses import dataclass

NUCLEAR = "nuclear"
LQ = "lq"
SCAD = "scad"
GDP = "gdp"
FAMILIES = (NUCLEAR, LQ, SCAD, GDP)

# default hyper-parameters: lq exponent, scad knee, gdp scale
DEFAULT_HYPER = {LQ: 0.1, SCAD: 5.0, GDP: 1.0}


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family plus strength (lam) and shape hyper-parameter."""
    family: str
    lam: float
    hyper: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError("unknown penalty family %r" % (self.family,))
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError("penalty strength must be finite and >= 0")
        hyper = self.hyper
        if self.family == NUCLEAR:
            if hyper is not None:
                raise ValueError("nuclear penalty takes no hyper-parameter")
        else:
            if hyper is None:
                hyper = DEFAULT_HYPER[self.family]
            hyper = float(hyper)
            if self.family == LQ and not (0.0 < hyper <= 1.0):
                raise ValueError("lq exponent must be in (0, 1]")
            if self.family == SCAD and not (hyper > 2.0):
                raise ValueError("scad hyper-parameter must be > 2")
            if self.family == GDP and not (hyper > 0.0):
                raise ValueError("gdp hyper-parameter must be > 0")
            object.__setattr__(self, "hyper", hyper)
        object.__setattr__(self, "lam", float(self.lam))


def nuclear(lam):
    return PenaltySpec(NUCLEAR, lam)


def lq(lam, q=0.1):
    return PenaltySpec(LQ, lam, q)


def scad(lam, gamma=5.0):
    return PenaltySpec(SCAD, lam, gamma)


def gdp(lam, gamma=1.0):
    return PenaltySpec(GDP, lam, gamma)


def penalty_value(spec, eta):
    """Penalty evaluated entrywise at nonnegative eta (scalar or array)."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0) or not np.all(np.isfinite(eta)):
        raise ValueError("penalty_value: eta must be finite and >= 0")
    lam = spec.lam
    if spec.family == NUCLEAR:
        out = lam * eta
    elif spec.family == LQ:
        out = lam * eta ** spec.hyper
    elif spec.family == SCAD:
        gamma = spec.hyper
        low = lam * eta
        mid = (-eta ** 2 + 2.0 * gamma * lam * eta - lam ** 2) / (2.0 * (gamma - 1.0))
        high = np.full_like(eta, lam ** 2 * (gamma + 1.0) / 2.0)
        out = np.where(eta <= lam, low, np.where(eta <= gamma * lam, mid, high))
    else:
        out = lam * np.log1p(eta / spec.hyper)
    return out if out.ndim else float(out)


def supergradient(spec, eta):
    """A supergradient of the penalty at eta (entrywise, nonnegative).

    For lq with q < 1 the value at eta = 0 is +inf: a zeroed singular value
    gets an infinite threshold and can never reactivate. With lam = 0 every
    supergradient is 0, including that corner.
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0) or not np.all(np.isfinite(eta)):
        raise ValueError("supergradient: eta must be finite and >= 0")
    lam = spec.lam
    if lam == 0.0:
        out = np.zeros_like(eta)
    elif spec.family == NUCLEAR:
        out = np.full_like(eta, lam)
    elif spec.family == LQ:
        q = spec.hyper
        with np.errstate(divide="ignore"):
            out = np.where(eta > 0, lam * q * eta ** (q - 1.0),
                           lam if q == 1.0 else np.inf)
    elif spec.family == SCAD:
        gamma = spec.hyper
        out = np.where(eta <= lam, lam,
                       np.where(eta <= gamma * lam,
                                (gamma * lam - eta) / (gamma - 1.0), 0.0))
    else:
        out = lam / (spec.hyper + eta)
    return out if out.ndim else float(out)


def has_absorbing_zeros(spec):
    """True when the supergradient is +inf at 0 (lq with q < 1).

    For such penalties a singular value thresholded to exactly zero draws an
    infinite weight forever after, so no continuation of the same iterate can
    ever reactivate it.  Path-following code uses this to decide whether
    warm-starting across penalty strengths is safe.
    """
    return spec.family == LQ and spec.hyper < 1.0 and spec.lam > 0.0


def has_adaptive_weights(spec):
    """True when the supergradient varies with eta (lq q < 1, scad, gdp).

    Adaptive thresholds make the fitted model depend on where the iteration
    started: components absent from the starting point face the weight at
    zero, established ones the (smaller) weight at their current size. Path
    fits for such penalties are initialization-sensitive, so path-following
    code hedges across starting points. The plain nuclear norm (and lq at
    q = 1, which equals it) weighs every component identically and has no
    such dependence.
    """
    if spec.lam == 0.0 or spec.family == NUCLEAR:
        return False
    return not (spec.family == LQ and spec.hyper == 1.0)


def weighted_svt(M, weights, step, return_factors=False):
    """Weighted singular-value thresholding of a dense matrix.

    Each singular value s_r is replaced by max(s_r - step*weights[r], 0) and
    the matrix is rebuilt from the surviving components. With weights
    nondecreasing along the spectrum this is the exact minimizer of

        0.5 * ||Z - M||_F^2 + step * sum_r weights[r] * s_r(Z)

    over all matrices Z of the same shape.

    Parameters
    ----------
    M : ndarray
        Matrix to threshold; must be finite.
    weights : array_like
        Nonnegative per-singular-value weights, len >= min(M.shape).
        +inf is allowed and forces the component to zero.
    step : float
        Nonnegative multiplier on the weights.
    return_factors : bool
        If True, also return (U, s_thresholded, Vt) of the economy SVD.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("weighted_svt: non-finite input")
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or np.any(np.isnan(weights)):
        raise ValueError("weighted_svt: weights must be >= 0")
    if not (np.isfinite(step) and step >= 0):
        raise ValueError("weighted_svt: step must be finite and >= 0")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if weights.size < s.size:
        raise ValueError("weighted_svt: need at least %d weights" % s.size)
    with np.errstate(invalid="ignore"):
        s_new = s - step * weights[:s.size]
    s_new[~(s_new > 0)] = 0.0  # catches -inf (infinite weight) and 0*inf NaN
    r = int(np.count_nonzero(s_new))
    Z = (U[:, :r] * s_new[:r]) @ Vt[:r]
    if return_factors:
        return Z, U, s_new, Vt
    return Z


def scalar_prox(spec, z, grid_step=None):
    """Brute-force prox of the penalty at a nonnegative scalar.

    Minimizes 0.5*(z - eta)**2 + penalty_value(spec, eta) over eta >= 0 by a
    dense grid on [0, z] followed by golden-section refinement around the
    best grid point. Slow by construction; this is the independent oracle the
    thresholding tests compare against, not a solver component.
    """
    z = float(z)
    if not (np.isfinite(z) and z >= 0):
        raise ValueError("scalar_prox: z must be finite and >= 0")

    def objective(eta):
        return 0.5 * (z - eta) ** 2 + penalty_value(spec, eta)

    if z == 0.0:
        return 0.0
    if grid_step is None:
        grid_step = 1e-4 * max(1.0, z)
    grid = np.arange(0.0, z + grid_step, grid_step)
    grid[-1] = min(grid[-1], z)
    vals = 0.5 * (z - grid) ** 2 + penalty_value(spec, grid)
    best = int(np.argmin(vals))

    # golden-section on the bracket around the best grid point
    lo = max(grid[best] - grid_step, 0.0)
    hi = min(grid[best] + grid_step, z)
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    eta = 0.5 * (a + b)
    # the penalty is concave, so 0 can win even when the local basin is interior
    candidates = [0.0, eta, z]
    return float(min(candidates, key=objective))
