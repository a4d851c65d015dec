"""Hard Thresholding Pursuit and the Sparse Power Factorization outer loop."""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DegenerateInputError, SingularSystemError
from .measurement import f_matrix, g_matrix
from .signals import rank_one_distance, rel_error, squared_modulus

__all__ = [
    "TIE_BREAK_LOWEST_INDEX",
    "SpfConfig",
    "RecoveryResult",
    "top_k_support",
    "restricted_least_squares",
    "least_squares",
    "htp",
    "spf",
    "normalize_phase",
]

TIE_BREAK_LOWEST_INDEX = "lowest-index"
_TIE_BREAKS = (TIE_BREAK_LOWEST_INDEX, "highest-index")
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class SpfConfig:
    s1: int
    s2: int
    max_outer_iter: int = 50
    max_htp_iter: int = 50
    rel_change_tol: float = 1e-8
    tie_break: str = TIE_BREAK_LOWEST_INDEX

    def __post_init__(self):
        if self.s1 < 1 or self.s2 < 1:
            raise ValueError("sparsity levels must be positive")
        if self.max_outer_iter < 1 or self.max_htp_iter < 1:
            raise ValueError("iteration caps must be positive")
        if self.rel_change_tol < 0:
            raise ValueError("rel_change_tol must be nonnegative")
        if self.tie_break not in _TIE_BREAKS:
            raise ValueError(f"unknown tie_break {self.tie_break!r}; expected one of {_TIE_BREAKS}")

    def check_dims(self, n1, n2):
        if self.s1 > n1 or self.s2 > n2:
            raise ValueError(f"sparsity ({self.s1}, {self.s2}) exceeds dimensions ({n1}, {n2})")


@dataclass
class RecoveryResult:
    u_hat: np.ndarray
    v_hat: np.ndarray
    iterations: int
    converged: bool
    error_trace: list = field(default_factory=list)

    @property
    def X_hat(self):
        return np.outer(self.u_hat, self.v_hat.conj())


def top_k_support(w, k, tie_break=TIE_BREAK_LOWEST_INDEX):
    """Indices of the ``k`` largest-modulus entries of ``w``, sorted ascending.

    Equal moduli are resolved deterministically: by default the smaller index
    wins.
    """
    w = np.asarray(w)
    if w.ndim != 1:
        raise ValueError("w must be one-dimensional")
    if not 1 <= k <= w.size:
        raise ValueError(f"k must lie in [1, {w.size}], got {k}")
    if tie_break not in _TIE_BREAKS:
        raise ValueError(f"unknown tie_break {tie_break!r}")
    mag = squared_modulus(w)
    idx = np.arange(w.size)
    if tie_break != TIE_BREAK_LOWEST_INDEX:
        idx = -idx
    # lexsort: last key is primary
    order = np.lexsort((idx, -mag))
    return np.sort(order[:k])


def restricted_least_squares(A, b, J):
    """Minimise ``||A x - b||`` over vectors supported on ``J``.

    Solved through a thin QR factorisation of the column submatrix. Raises
    :class:`SingularSystemError` if that submatrix is numerically rank
    deficient (smallest singular value below ``1e-10`` times the largest).
    """
    A = np.asarray(A)
    b = np.asarray(b)
    J = np.asarray(J, dtype=int)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"b must have shape ({m},), got {b.shape}")
    if J.size > m:
        raise SingularSystemError(J, f"support of size {J.size} exceeds {m} rows")
    dtype = np.result_type(A, b, np.complex128)
    x = np.zeros(n, dtype=dtype)
    if J.size == 0:
        return x
    q, r = np.linalg.qr(A[:, J])
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[0] == 0 or sv[-1] < _RANK_TOL * sv[0]:
        raise SingularSystemError(J)
    x[J] = solve_triangular(r, q.conj().T @ b)
    return x


def least_squares(A, b):
    """Unrestricted least squares (the dense branch of the outer loop)."""
    A = np.asarray(A)
    return restricted_least_squares(A, b, np.arange(A.shape[1]))


def htp(A, b, s, cfg=None, full_output=False):
    """Hard Thresholding Pursuit for ``b ~ A x`` with ``x`` ``s``-sparse.

    Starting from ``x = 0`` each sweep takes the gradient step
    ``w = x + A^*(b - A x)``, keeps the ``s`` largest entries of ``w`` as the
    new support and re-fits by least squares on it. Stops once the support
    repeats or after ``cfg.max_htp_iter`` sweeps.

    With ``full_output=True`` returns ``(x, n_iter, support)``.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    m, n = A.shape
    if not 1 <= s <= n:
        raise ValueError(f"s must lie in [1, {n}], got {s}")
    if s > m:
        raise ValueError(f"s={s} exceeds the number of rows m={m}")
    max_iter = 50 if cfg is None else cfg.max_htp_iter
    tie_break = TIE_BREAK_LOWEST_INDEX if cfg is None else cfg.tie_break

    x = np.zeros(n, dtype=np.result_type(A, b, np.complex128))
    if not np.any(b):
        support = np.arange(0)
        return (x, 0, support) if full_output else x
    support = None
    it = 0
    while it < max_iter:
        it += 1
        w = x + A.conj().T @ (b - A @ x)
        new_support = top_k_support(w, s, tie_break)
        x = restricted_least_squares(A, b, new_support)
        if support is not None and np.array_equal(new_support, support):
            break
        support = new_support
    return (x, it, new_support) if full_output else x


def normalize_phase(u, v):
    """Rotate ``u`` so its largest-modulus entry is real positive; ``v`` absorbs the phase.

    ``u v^*`` is unchanged.
    """
    i = int(np.argmax(np.abs(u)))
    if u[i] == 0:
        return u, v
    mod = abs(u[i])
    phase = u[i] / mod
    u, v = u / phase, v / phase
    u[i] = mod
    return u, v


def _sparse_step(A, rhs, s, n, cfg):
    if s < n:
        return htp(A, rhs, s, cfg)
    return least_squares(A, rhs)


def spf(op, b, cfg, v0, truth=None):
    """Sparse Power Factorization.

    Alternates ``u <- HTP(F(v), b, s1)`` and ``v <- HTP(G(u), conj(b), s2)``
    (plain least squares for a factor whose sparsity equals its length),
    normalising ``v`` before and ``u`` after each ``u``-update. Stops when
    the relative Frobenius change of ``u v^*`` drops below
    ``cfg.rel_change_tol`` or after ``cfg.max_outer_iter`` sweeps, returning
    the last iterate.

    ``truth=(u, v)`` records ``||u_t v_t^* - u v^*||_F / ||u v^*||_F`` after
    every sweep.
    """
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (op.m,):
        raise ValueError(f"b must have shape ({op.m},), got {b.shape}")
    v = np.asarray(v0, dtype=np.complex128)
    if v.shape != (op.n2,):
        raise ValueError(f"v0 must have shape ({op.n2},), got {v.shape}")
    if not np.any(v):
        raise ValueError("v0 must be nonzero")
    cfg.check_dims(op.n1, op.n2)
    b_conj = b.conj()

    trace = []
    u_prev = v_prev = None
    converged = False
    t = 0
    while t < cfg.max_outer_iter:
        t += 1
        v = v / np.linalg.norm(v)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
        u = _sparse_step(f_matrix(op, v), b, cfg.s1, op.n1, cfg)
        norm_u = np.linalg.norm(u)
        if norm_u == 0:
            raise DegenerateInputError("u-update returned zero; measurements carry no signal")
        u = u / norm_u
        v = _sparse_step(g_matrix(op, u), b_conj, cfg.s2, op.n2, cfg)
        if not np.any(v):
            raise DegenerateInputError("v-update returned zero; measurements carry no signal")
        if truth is not None:
            trace.append(rel_error((u, v), *truth))
        if u_prev is not None:
            denom = np.linalg.norm(u_prev) * np.linalg.norm(v_prev)
            change = rank_one_distance(u, v, u_prev, v_prev)
            if change < cfg.rel_change_tol * denom:
                converged = True
                break
        u_prev, v_prev = u, v

    u, v = normalize_phase(u, v)
    return RecoveryResult(u_hat=u, v_hat=v, iterations=t, converged=converged, error_trace=trace)
