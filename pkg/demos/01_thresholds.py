"""
Thresholds and regimes
======================

Where does the tail bound start to bite?  For a few sample sizes, walk sigma2
down from 1 to 1e-300 and print which case applies, the threshold u, the
Gaussian-range start u_bar and the bound evaluated right at u.
"""

import numpy as np

import suplab

for n in (100, 10**4, 10**6):
    print(f"n = {n}")
    print(f"  {'sigma2':>9} {'case':>4} {'u':>10} {'u_bar':>10} {'2 sqrt(n) s2':>13} {'bound at u':>11}")
    for s2 in np.logspace(0, -300, 11):
        regime = suplab.classify_regime(n, s2)
        u = suplab.threshold_u(n, s2)
        try:
            at_u = suplab.upper_bound_theorem1(n, s2, u)
        except suplab.NotApplicableError:
            at_u = float("nan")
        print(
            f"  {s2:9.1e} {regime.name:>4} {u:10.4g} {suplab.threshold_u_bar(s2):10.4g}"
            f" {2 * np.sqrt(n) * s2:13.4g} {at_u:11.3g}"
        )
    print()

# The constants are universal but unspecified; every function takes a
# BoundParams, so the whole table can be redone with other choices.
params = suplab.DEFAULT_PARAMS.with_overrides(C3=5, C4=5, C5=5)
print("with C3 = C4 = C5 = 5, u(1000, 1e-3) =", suplab.threshold_u(1000, 1e-3, params=params))

# calibration_report sweeps a 200 x 200 grid and summarises how the defaults behave
report = suplab.calibration_report()
for name, entry in report.items():
    print(f"{name:>12}: {entry}")
