"""
Hard Thresholding Pursuit
=========================

HTP solves ``b ~ A x`` for an ``s``-sparse ``x``. It alternates a gradient
step, keeping the ``s`` largest entries, and a least-squares refit on them.
"""
import numpy as np

from spf.solvers import htp

rng = np.random.default_rng(3)
m, n, s = 80, 40, 4
A = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2 * m)

x0 = np.zeros(n, complex)
support = np.sort(rng.choice(n, s, replace=False))
x0[support] = rng.standard_normal(s) + 1j * rng.standard_normal(s)

x, n_iter, found = htp(A, A @ x0, s, full_output=True)
print("true support :", support)
print("found support:", found, "after", n_iter, "sweeps")
print("error        :", np.linalg.norm(x - x0))

# with noise the fit is no longer exact but the support usually survives
noisy = A @ x0 + 0.01 * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
print("noisy error  :", np.linalg.norm(htp(A, noisy, s) - x0))
