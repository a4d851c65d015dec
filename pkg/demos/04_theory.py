"""
Convergence-radius quantities
=============================

Evaluate the closed-form constants behind the local convergence guarantee,
and compare a Monte Carlo RIP estimate with the regime they need.
"""
import numpy as np

from spf import new_gaussian_operator, theory

for delta, nu in [(0.0, 0.0), (0.02, 0.01), (0.04, 0.04), (0.08, 0.0)]:
    print(theory.theory_report(delta, nu).format())
    print()

# how wide is the basin of attraction as the RIP constant grows?
for delta in np.linspace(0, 0.2, 6):
    w = theory.omega_sup(delta, 0.0)
    print(f"delta = {delta:.2f}: omega_sup = {np.degrees(w):6.2f} deg")

# a Monte Carlo estimate is only a lower bound on the true constant
op = new_gaussian_operator(32, 32, 800, seed=0)
for trials in (10, 100, 1000):
    print(trials, "probes:", theory.estimate_rip_constant(op, 2, 2, 2, trials, seed=1))
