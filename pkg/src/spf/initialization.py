"""Thresholding initialization for the outer loop.

Scores each row of ``A^*(b)`` by the energy of its best ``s2``-term
approximation, keeps the best rows, then the strongest columns of that row
block, and returns the leading right singular vector of the resulting
submatrix as the starting point ``v0``.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceWarning, DegenerateInputError
from .measurement import adjoint
from .signals import squared_modulus
from .solvers import TIE_BREAK_LOWEST_INDEX, top_k_support

__all__ = [
    "InitResult",
    "row_scores",
    "select_row_support",
    "select_col_support",
    "leading_right_singular_vector",
    "power_iteration",
    "thresholding_init",
]

POWER_TOL = 1e-12
POWER_MAX_ITER = 1000


@dataclass
class InitResult:
    j1_hat: np.ndarray
    j2_hat: np.ndarray
    v0: np.ndarray
    sigma1: float
    degenerate: bool = False
    power_converged: bool = True


def row_scores(adjB, s2):
    """Per-row l2 norm of the best ``s2``-sparse approximation."""
    adjB = np.asarray(adjB)
    if adjB.ndim != 2:
        raise ValueError("adjB must be a matrix")
    n2 = adjB.shape[1]
    if not 1 <= s2 <= n2:
        raise ValueError(f"s2 must lie in [1, {n2}], got {s2}")
    mag2 = np.sort(squared_modulus(adjB), axis=1)
    return np.sqrt(mag2[:, n2 - s2:].sum(axis=1))


def select_row_support(xi, count, tie_break=TIE_BREAK_LOWEST_INDEX):
    xi = np.asarray(xi, dtype=float)
    if not 1 <= count <= xi.size:
        raise ValueError(f"count must lie in [1, {xi.size}], got {count}")
    return top_k_support(xi, count, tie_break)


def select_col_support(adjB, j1_hat, s2, tie_break=TIE_BREAK_LOWEST_INDEX):
    """The ``s2`` columns of the row-restricted matrix with the largest l2 norms.

    The Frobenius argmax over column subsets separates column by column, so
    sorting column norms is exact.
    """
    adjB = np.asarray(adjB)
    n2 = adjB.shape[1]
    if not 1 <= s2 <= n2:
        raise ValueError(f"s2 must lie in [1, {n2}], got {s2}")
    block = adjB[np.asarray(j1_hat, dtype=int), :]
    col_norms = np.sqrt(squared_modulus(block).sum(axis=0))
    return top_k_support(col_norms, s2, tie_break)


def power_iteration(M, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Power iteration on ``M^* M`` from the normalised all-ones vector.

    Returns ``(v, sigma1, converged)``; ``v`` is phase-normalised so that its
    largest-modulus entry is real positive.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError("M must be a matrix")
    if not np.any(M):
        raise DegenerateInputError("leading singular vector of a zero matrix is undefined")
    gram = M.conj().T @ M
    v = np.ones(M.shape[1], dtype=np.complex128) / np.sqrt(M.shape[1])
    converged = False
    for _ in range(max_iter):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            # start vector in the null space; restart from the strongest column
            w = gram[:, int(np.argmax(np.linalg.norm(gram, axis=0)))]
            norm_w = np.linalg.norm(w)
        w = w / norm_w
        step = np.linalg.norm(w - v)
        v = w
        if step < tol:
            converged = True
            break
    i = int(np.argmax(np.abs(v)))
    mod = abs(v[i])
    v = v * (mod / v[i])
    v[i] = mod
    sigma = float(np.linalg.norm(M @ v))
    return v, sigma, converged


def leading_right_singular_vector(M, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Unit leading right singular vector of ``M`` and the spectral norm ``||M v||``.

    Warns with :class:`ConvergenceWarning` if the iteration cap is reached;
    the current iterate is returned in that case.
    """
    v, sigma, converged = power_iteration(M, tol, max_iter)
    if not converged:
        warnings.warn(
            f"power iteration stopped after {max_iter} iterations without reaching tol={tol}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return v, sigma


def thresholding_init(op, b, s1, s2, tie_break=TIE_BREAK_LOWEST_INDEX, row_count=None,
                      strict=False):
    """Starting vector ``v0`` from the thresholded adjoint image ``A^*(b)``.

    ``row_count`` sets ``|j1_hat|`` (default ``s1``). When the selected
    submatrix is zero the result falls back to the normalised indicator of
    ``j2_hat`` with ``degenerate=True``, unless ``strict`` is set, in which
    case :class:`DegenerateInputError` propagates.
    """
    if not 1 <= s1 <= op.n1 or not 1 <= s2 <= op.n2:
        raise ValueError(f"sparsity ({s1}, {s2}) outside dimensions ({op.n1}, {op.n2})")
    row_count = s1 if row_count is None else row_count
    adjB = adjoint(op, b)
    xi = row_scores(adjB, s2)
    j1 = select_row_support(xi, row_count, tie_break)
    j2 = select_col_support(adjB, j1, s2, tie_break)
    sub = adjB[np.ix_(j1, j2)]
    v0 = np.zeros(op.n2, dtype=np.complex128)
    try:
        v_sub, sigma, converged = power_iteration(sub)
    except DegenerateInputError:
        if strict:
            raise
        v0[j2] = 1.0 / np.sqrt(j2.size)
        return InitResult(j1, j2, v0, 0.0, degenerate=True)
    if not converged:
        warnings.warn("power iteration hit its cap in thresholding_init", ConvergenceWarning,
                      stacklevel=2)
    v0[j2] = v_sub
    return InitResult(j1, j2, v0, sigma, power_converged=converged)
