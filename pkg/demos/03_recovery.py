"""
Recovering a sparse rank-one matrix
===================================

Plant peaky sparse factors, measure them, initialise from the thresholded
adjoint image and run the alternating solver. The error trace shows the
fast local convergence.
"""
import math

import numpy as np

import spf

n, s = 64, 3
m = math.ceil(8 * 2 * s * math.log(n / s))
op = spf.new_gaussian_operator(n, n, m, seed=10)

# u is peaky in the k-largest sense, v in the sup-norm sense
inst = spf.make_instance(op, s, s, k=1, xi=0.8, mu=0.8, nu=0.0,
                         u_seed=11, v_seed=12, noise_seed=13)

init = spf.thresholding_init(op, inst.b, s, s)
print(f"m = {m}; estimated supports {init.j1_hat} and {init.j2_hat}")
print("true supports", np.flatnonzero(inst.u), np.flatnonzero(inst.v))
print("sin angle(v0, v) =", spf.sin_angle(init.v0, inst.v))

res = spf.spf(op, inst.b, spf.SpfConfig(s, s), init.v0, truth=(inst.u, inst.v))
for t, err in enumerate(res.error_trace, 1):
    print(f"  sweep {t}: rel error {err:.2e}")

# the same instance with 1% noise settles near the noise floor
noisy = spf.make_instance(op, s, s, 1, 0.8, 0.8, 0.01, 11, 12, 13)
res = spf.spf(op, noisy.b, spf.SpfConfig(s, s), spf.thresholding_init(op, noisy.b, s, s).v0)
print("noisy rel error:", spf.rel_error((res.u_hat, res.v_hat), noisy.u, noisy.v),
      "bound:", 8.3 * 0.01 + 1e-2)
