"""
A single member against Bennett
===============================

One cell count is Binomial(n, sigma2).  Its upper tail can be simulated
cheaply and set beside Bennett's bound and the simplified exponential form.
"""

import numpy as np

import suplab

for n, sigma2 in [(100, 0.1), (1000, 0.01), (10**4, 0.001)]:
    base = 2 * np.sqrt(n) * sigma2
    # moderate levels first, then the range v > 2 sqrt(n) sigma2 where the simplified form applies
    levels = list(np.sqrt(sigma2) * np.array([0.5, 1.0, 2.0, 3.0])) + list(base * np.array([1.05, 1.5, 3.0]))
    rows = suplab.compare_with_bounds(
        suplab.estimate_member_tail(n, sigma2, levels, 10**5, seed=5), n, sigma2, target="member"
    )
    print(f"n = {n}, sigma2 = {sigma2}")
    for row in rows:
        try:
            simplified = f"{suplab.bennett_simplified(n, sigma2, row.v):9.2e}"
        except suplab.NotApplicableError:
            simplified = f"{'-':>9}"
        print(
            f"  v={row.v:8.4f}  p_hat={row.p_hat:9.2e}  upper={row.ci_high:9.2e}"
            f"  bennett={row.bound_bennett:9.2e}  simplified={simplified}"
            f"  {row.dominance}"
        )

# Far in the tail the bound is astronomically small while 0 hits out of R
# still leaves a 99% upper limit near 6.6 / R: a finite simulation cannot
# certify such levels, it can only fail to contradict them.
print("Wilson 99% upper limit for 0 / 100000:", suplab.wilson_interval(0, 10**5)[1])
