"""Closed forms on the two-vertex graph.

Two exact results are easy to see on a single edge with weight W:

* the field ratio e^{u_1 - u_0} under the limiting density is inverse
  Gaussian with mean 1 and shape W;
* the occupation martingale has variance (1 - e^{-h}) / (4W) at horizon h,
  approaching the Poisson-equation diagonal -Q(0)_{00} = 1/(4W).
"""

import numpy as np
from scipy import stats

from reinforce_lab.batch import two_vertex_martingale_samples
from reinforce_lab.potential import solve_q
from reinforce_lab.suites import sample_limit_field, two_vertex

W = 1.0
g = two_vertex(W)

samples, _ = sample_limit_field(g, 0, 8000, seed=3, thinning=4)
v = np.exp(samples[:, 1] - samples[:, 0])
mu = v.mean()
lam = mu ** 3 / v.var(ddof=1)
ks = stats.kstest(v, stats.invgauss(mu / lam, scale=lam).cdf)
print(f"field ratio: fitted mean {mu:.3f} (target 1), "
      f"fitted shape {lam:.3f} (target {W})")
print(f"inverse-Gaussian KS p = {ks.pvalue:.3f}\n")

rng = np.random.default_rng(4)
q_limit = -solve_q(g, np.zeros(2))[0, 0]
print(f"martingale variance vs horizon (limit -Q(0)_00 = {q_limit}):")
for h in (1.0, 2.0, 4.0, 8.0):
    m = two_vertex_martingale_samples(W, h, 30_000, rng)
    target = (1 - np.exp(-h)) / (4 * W)
    print(f"  h = {h:4.1f}: sample var {m.var():.4f}, exact {target:.4f}")
