"""Sparse Power Factorization for bilinear inverse problems with sparsity constraints.

Recover an ``s1``-sparse ``u`` and an ``s2``-sparse ``v`` from
``b = A(u v^*) + z`` where ``A`` is a lifted complex Gaussian operator.

>>> import spf
>>> op = spf.new_gaussian_operator(32, 32, 120, seed=1)
>>> u = spf.gen_peaky_vector(32, 2, 0.9, seed=2)
>>> v = spf.gen_peaky_vector(32, 2, 0.9, seed=3)
>>> b = spf.apply_rank_one(op, u, v)
>>> init = spf.thresholding_init(op, b, 2, 2)
>>> res = spf.spf(op, b, spf.SpfConfig(2, 2), init.v0)
>>> spf.rel_error((res.u_hat, res.v_hat), u, v) < 1e-6
True
"""
from .exceptions import ConvergenceWarning, DegenerateInputError, DomainError, SingularSystemError
from .initialization import (
    InitResult,
    leading_right_singular_vector,
    row_scores,
    select_col_support,
    select_row_support,
    thresholding_init,
)
from .measurement import (
    MeasurementOperator,
    adjoint,
    apply,
    apply_rank_one,
    dump_operator,
    f_matrix,
    g_matrix,
    load_operator,
    new_gaussian_operator,
)
from .signals import (
    ProblemInstance,
    gen_k_peaky_vector,
    gen_peaky_vector,
    k_largest_norm,
    make_instance,
    noise_for_ratio,
    noise_ratio,
    rel_error,
    sin_angle,
)
from .solvers import RecoveryResult, SpfConfig, htp, restricted_least_squares, spf, top_k_support
from .theory import (
    TheoryReport,
    adjoint_noise_norm,
    angle_bound,
    c_delta,
    estimate_rip_constant,
    m_delta_nu,
    near_isometry_residual,
    omega_sup,
    sufficient_condition,
    theory_report,
)

__version__ = "0.1.0"
