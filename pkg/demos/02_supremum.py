"""
The supremum over a grid class
==============================

For the class of centered cell indicators the supremum of the normalized
partial sums reduces to the largest cell-count deviation.  Check this on one
sample, then estimate a tail probability and compare it with exact
enumeration.
"""

import math

import suplab

n, sigma2 = 500, 0.013
path = suplab.sample_uniform(n, seed=1)
spec = suplab.GridClassSpec(sigma2)
print(f"{spec.k} cells of width {sigma2}; leftover interval {spec.leftover}")

# member by member versus the one-pass count formula
direct = suplab.sup_direct(path, spec)
fast, cell = suplab.sup_via_increments(path, sigma2)
print(f"direct {direct:.12f}  via counts {fast:.12f}  attained on cell {cell}")

# tail of the supremum at a few levels, 20000 replications
config = suplab.ExperimentConfig(n, sigma2, ["2*sqrt(n)*sigma2", 0.5, 1.0, 1.5], 20000, master_seed=2)
for est in suplab.estimate_tail(config):
    print(f"P(sup >= {est.v:.4f}) ~ {est.p_hat:.4f}  99% CI [{est.ci_low:.4f}, {est.ci_high:.4f}]")

# small cases can be enumerated exactly with rational arithmetic
# (0.3 is not a dyadic rational, so the exact answer has a huge denominator)
n, sigma2, v = 6, 0.3, 0.7
exact = suplab.exact_tail_small(n, sigma2, v)
(est,) = suplab.estimate_tail(suplab.ExperimentConfig(n, sigma2, [v], 100000, master_seed=3))
print(f"exact for n=4, sigma2=1/2, v=1: {suplab.exact_tail_small(4, 0.5, 1.0)}")
print(f"n={n}, sigma2={sigma2}, v={v}: exact {float(exact):.5f}, simulated {est.p_hat:.5f}")

# regime A: with sigma2 tiny every occupied cell holds one point, so the supremum is about 1/sqrt(n)
value, _ = suplab.sup_via_increments(suplab.sample_uniform(20, seed=4), 1e-300)
print(f"sigma2 = 1e-300, n = 20: sup = {value:.6f}, 1/sqrt(n) = {1 / math.sqrt(20):.6f}")
