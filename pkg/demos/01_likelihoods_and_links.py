"""Coupled likelihoods and link functions, on data small enough to eyeball.

The model scores a binary block and a quantitative block that share rows
through one parameter matrix Theta = offsets + low-rank part. This script
builds a 4 x (3+2) example by hand and walks through:

  * inverse_link: natural parameter -> Bernoulli success probability
  * binary_nll / quantitative_nll: per-block scaled losses
  * joint_nll: what the solver actually minimizes (likelihood part)
  * gradient identities, checked against finite differences
"""

import numpy as np

from gsca import (CoupledData, binary_nll, binary_nll_grad, inverse_link,
                  joint_nll, lipschitz_bound, quantitative_nll,
                  quantitative_nll_grad)

rng = np.random.default_rng(7)

# ---------------------------------------------------------------------------
# a tiny coupled data set: 4 samples, 3 binary features, 2 quantitative ones
# ---------------------------------------------------------------------------
X1 = np.array([[1., 0., 1.],
               [0., 0., 1.],
               [1., 1., 0.],
               [0., 1., 0.]])
X2 = np.array([[0.5, -1.2],
               [0.1, 0.4],
               [-0.7, 2.0],
               [1.3, -0.3]])
data = CoupledData.from_arrays(X1, X2)
print("rows I=%d, binary J1=%d, quantitative J2=%d" % (data.I, data.J1, data.J2))

# ---------------------------------------------------------------------------
# the link turns natural parameters into probabilities
# ---------------------------------------------------------------------------
theta_row = np.array([-2.0, 0.0, 2.0])
for link in ("logit", "probit"):
    print("inverse_link([-2, 0, 2], %s) =" % link,
          np.round(inverse_link(theta_row, link), 4))
# both links are symmetric around theta = 0 -> probability one half
assert inverse_link(0.0, "logit") == 0.5

# ---------------------------------------------------------------------------
# block losses at a random parameter value
# ---------------------------------------------------------------------------
Theta = rng.standard_normal(size=(data.I, data.J)) * 0.5
Theta1, Theta2 = Theta[:, :data.J1], Theta[:, data.J1:]
sigma2 = 0.8

l1 = binary_nll(data.X1, Theta1, data.Q1, "logit")
l2 = quantitative_nll(data.X2, Theta2, data.Q2, sigma2)
lj = joint_nll(data, Theta, sigma2, "logit")
print("binary loss %.6f + quantitative loss %.6f = joint %.6f"
      % (l1, l2, l1 + l2))
assert np.isclose(l1 + l2, lj)

# ---------------------------------------------------------------------------
# gradients agree with central finite differences
# ---------------------------------------------------------------------------
def fd_grad(f, M, h=1e-6):
    G = np.zeros_like(M)
    it = np.nditer(M, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        P, Q = M.copy(), M.copy()
        P[idx] += h
        Q[idx] -= h
        G[idx] = (f(P) - f(Q)) / (2 * h)
        it.iternext()
    return G

g1 = binary_nll_grad(data.X1, Theta1, data.Q1, "logit")
g1_fd = fd_grad(lambda T: binary_nll(data.X1, T, data.Q1, "logit"), Theta1)
print("binary gradient max abs error vs finite differences: %.2e"
      % np.abs(g1 - g1_fd).max())

g2 = quantitative_nll_grad(data.X2, Theta2, data.Q2, sigma2)
g2_fd = fd_grad(lambda T: quantitative_nll(data.X2, T, data.Q2, sigma2),
                Theta2)
print("quantitative gradient max abs error vs finite differences: %.2e"
      % np.abs(g2 - g2_fd).max())

# ---------------------------------------------------------------------------
# the curvature bound that sets the majorization step size
# ---------------------------------------------------------------------------
for link in ("logit", "probit"):
    for s2 in (2.0, 0.5, 0.1):
        print("lipschitz_bound(%s, sigma2=%.1f) = %.2f"
              % (link, s2, lipschitz_bound(link, s2)))
# logit curvature is at most 1/4; the Gaussian part contributes 1/sigma2
assert lipschitz_bound("logit", 2.0) == 0.5
assert lipschitz_bound("logit", 0.1) == 10.0
