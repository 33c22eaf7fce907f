"""
Modulus of continuity
=====================

How large is the biggest oscillation of the normalized empirical process over
windows of width delta?  Simulate it and divide by sigma sqrt(log(2 / sigma))
with sigma = sqrt(delta) to see whether the ratio settles.
"""

import math

import numpy as np

import suplab

for n in (100, 1000, 10**4):
    line = []
    for delta in (0.001, 0.01, 0.1, 1.0):
        values = [suplab.modulus_statistic(suplab.sample_uniform(n, [10, n, r]), delta) for r in range(200)]
        sigma = math.sqrt(delta)
        norm = sigma * math.sqrt(math.log(2 / sigma))
        line.append(f"delta={delta:<6} mean/norm={np.mean(values) / norm:6.3f}")
    print(f"n={n:>6}: " + "  ".join(line))

# the same table is available from the command line:
#   suplab modulus --n-grid 100,1000 --delta-grid 0.01,0.1,1 --reps 200
