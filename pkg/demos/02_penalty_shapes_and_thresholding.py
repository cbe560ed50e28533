"""The four singular-value penalties and their thresholding behavior.

Each penalty family assigns a cost to a singular value eta >= 0 and, through
its supergradient, a per-component threshold weight. The solver's inner step
shrinks singular values by step * weight and discards what falls below zero.
This script prints the shapes side by side, demonstrates weighted_svt on a
known diagonal, and shows the one qualitative outlier: the fractional-power
family jumps — a singular value hit by its prox either stays well away from
zero or snaps exactly to it, and once at zero its weight is infinite, so it
can never come back.
"""

import numpy as np

from gsca import (gdp, has_absorbing_zeros, lq, nuclear, penalty_value,
                  scad, scalar_prox, supergradient, weighted_svt)

# ---------------------------------------------------------------------------
# penalty values and supergradients on a common grid
# ---------------------------------------------------------------------------
specs = [("nuclear", nuclear(1.0)), ("lq q=0.5", lq(1.0, 0.5)),
         ("scad g=5", scad(1.0, 5.0)), ("gdp g=1", gdp(1.0, 1.0))]
grid = np.array([0.0, 0.5, 1.0, 2.0, 5.0, 10.0])

print("penalty value at eta:")
print("  eta      " + "".join("%10s" % name for name, _ in specs))
for eta in grid:
    row = "".join("%10.4f" % penalty_value(s, eta) for _, s in specs)
    print("  %-8.1f" % eta + row)

print("supergradient (threshold weight) at eta:")
print("  eta      " + "".join("%10s" % name for name, _ in specs))
for eta in grid:
    row = "".join("%10.4f" % supergradient(s, eta) for _, s in specs)
    print("  %-8.1f" % eta + row)

# nuclear charges a constant rate; the concave families flatten out, so a
# large singular value is shrunk less (or not at all under scad past its
# plateau) while small ones are hit hard
assert supergradient(scad(1.0, 5.0), 10.0) == 0.0
assert supergradient(lq(1.0, 0.5), 0.0) == np.inf
print("absorbing zeros:",
      {name: has_absorbing_zeros(s) for name, s in specs})

# ---------------------------------------------------------------------------
# weighted singular-value thresholding on a diagonal matrix
# ---------------------------------------------------------------------------
# For a diagonal matrix the SVD is the diagonal itself, so the result of
# weighted_svt is readable by inspection: s -> max(s - step * w, 0).
M = np.diag([5.0, 3.0, 1.0])
weights = np.array([0.5, 1.0, 4.0])
out = weighted_svt(M, weights, step=1.0)
print("weighted_svt(diag([5,3,1]), w=[0.5,1,4]) ->", np.diag(out).round(6))
np.testing.assert_allclose(np.diag(out), [4.5, 2.0, 0.0])

# an infinite weight deletes its component no matter how large it is
out = weighted_svt(M, np.array([0.0, np.inf, np.inf]), step=1.0)
print("infinite weights on components 2,3   ->", np.diag(out).round(6))
np.testing.assert_allclose(np.diag(out), [5.0, 0.0, 0.0])

# ---------------------------------------------------------------------------
# the scalar prox: smooth families shrink continuously, lq jumps
# ---------------------------------------------------------------------------
print("scalar_prox(x) for x in [0, 2.5]:")
xs = np.linspace(0.0, 2.5, 11)
for name, spec in [("nuclear", nuclear(1.0)), ("lq q=0.5", lq(1.0, 0.5))]:
    vals = [scalar_prox(spec, x) for x in xs]
    print("  %-9s" % name + "".join("%6.2f" % v for v in vals))

# locate the lq jump: just below the critical point the prox is 0,
# just above it the prox lands on a strictly positive branch
spec = lq(1.0, 0.5)
lo, hi = 0.0, 2.5
for _ in range(60):
    mid = 0.5 * (lo + hi)
    if scalar_prox(spec, mid) == 0.0:
        lo = mid
    else:
        hi = mid
print("lq prox jumps at x ~ %.4f: 0 just below, %.4f just above"
      % (hi, scalar_prox(spec, hi)))
assert scalar_prox(spec, hi) > 0.5  # lands far from zero: a genuine jump
