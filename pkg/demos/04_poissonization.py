"""
Poissonization and coupling
===========================

Replacing the n sample points by a Poisson(n) number of points makes cell
counts independent, which is what the lower-bound argument needs.  Look at
the level it targets, the analytic probability of reaching it, a simulation
of the same event, and the coupling back to the fixed-n sample.
"""

import math

from scipy import stats

import suplab
from suplab import poissonization as po

for n in (10**4, 10**5, 10**6):
    sigma2 = math.log(n) / 7 / n
    holds, margin = suplab.check_inequality_24(n, sigma2, 0.1)
    print(
        f"n={n:>8}: u_hat={suplab.hat_u_poisson(n, sigma2):.5f}  m*={suplab.poisson_level_count(n, sigma2)}"
        f"  log T={suplab.log_T(n, sigma2):.3f}  1-exp(-T)={suplab.analytic_lower_bound(n, sigma2):.6f}"
        f"  margin at delta=0.1: {margin:+.3f}"
    )

n = 10**4
sigma2 = math.log(n) / 7 / n
est = suplab.poisson_max_experiment(n, sigma2, 2000, seed=6)
print(f"simulated P(max cell count >= {int(est.v)}) at n={n}: {est.p_hat:.4f} +- {est.half_width:.4f}")

# one coupled pair: the Poisson sample is a prefix of the uniform stream
pair = suplab.sample_coupled(n, seed=7)
print(f"eta = {pair.eta}, eta <= n: {pair.eta_le_n}, dominated on 0.01-cells: {suplab.coupling_dominates(pair, 0.01)}")

# eta ~ Poisson(0.99 n) overshoots n with probability that is only about one
# standard deviation out at n = 10^4, so the overshoot is common there
summary = suplab.coupling_experiment(n, 2000, seed=8)
exact = stats.poisson.cdf(n, 0.99 * n)
print(f"eta <= n on {summary.eta_le_n / summary.reps:.3f} of pairs (exact {exact:.3f}); failures {summary.dominance_failures}")
for m in (10**4, 10**5, 10**6):
    print(f"  P(eta <= n) at n = {m}: {stats.poisson.cdf(m, 0.99 * m):.6f}")

# sample-level view of a single Poisson path
path = po.sample_poisson_process(float(n), seed=9)
counts = po.cell_counts(path, sigma2)
print(f"{path.count} points, {counts.size} cells, largest count {counts.max()}, mean {counts.mean():.3f}")
