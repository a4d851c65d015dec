"""
The lifted measurement operator
===============================

A bilinear measurement of ``(u, v)`` is a linear measurement of the rank-one
matrix ``u v^*``. This script builds a small Gaussian operator and checks the
identities the solver leans on.
"""
import numpy as np

import spf

op = spf.new_gaussian_operator(8, 6, 40, seed=0)
print(op)
rng = np.random.default_rng(1)

# each entry is complex Gaussian with variance 1/m
print("mean |entry|^2 * m =", np.mean(np.abs(op.matrices) ** 2) * op.m)

# adjointness: <A(X), b> == <X, A^*(b)>
X = rng.standard_normal((8, 6)) + 1j * rng.standard_normal((8, 6))
b = rng.standard_normal(40) + 1j * rng.standard_normal(40)
print("adjoint gap:", abs(np.vdot(b, spf.apply(op, X)) - np.vdot(spf.adjoint(op, b), X)))

# A(x y^*) can be read as a linear map of x (F) or of y (G)
x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
lifted = spf.apply_rank_one(op, x, y)
print("F(y) x    :", np.linalg.norm(spf.f_matrix(op, y) @ x - lifted))
print("conj(G(x) y):", np.linalg.norm(np.conj(spf.g_matrix(op, x) @ y) - lifted))
