"""Closed-form quantities from the local convergence analysis, as executable checks.

Also provides a Monte Carlo estimator for the restricted isometry constant.
That estimator only ever sees finitely many test matrices, so it returns a
*lower bound* on the true constant, never a certificate.
"""
import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DomainError
from .measurement import adjoint, apply_rank_one, make_rng

__all__ = [
    "LEMMA_THRESHOLD",
    "RECOVERY_THRESHOLD",
    "TheoryReport",
    "c_delta",
    "omega_sup",
    "m_delta_nu",
    "perturbation_level",
    "angle_bound",
    "sufficient_condition",
    "support_threshold",
    "sin2_lower_bound",
    "theory_report",
    "estimate_rip_constant",
    "exhaustive_rip_constant",
    "near_isometry_residual",
    "adjoint_noise_norm",
]

# delta, nu <= 0.04: range of the lower bounds on sin(omega_sup)
LEMMA_THRESHOLD = 0.04
# delta, nu <= 0.08: range of the local convergence theorem
RECOVERY_THRESHOLD = 0.08

OMEGA_GRID_POINTS = 10_000
OMEGA_BISECT_TOL = 1e-10

_OMEGA_GRID = np.linspace(0.0, np.pi / 2, OMEGA_GRID_POINTS + 1)
_SIN_GRID = np.sin(_OMEGA_GRID)
_SIN_COS_GRID = _SIN_GRID * np.cos(_OMEGA_GRID)


def c_delta(delta):
    """``1.1 (sqrt(2/(1-d^2)) + 1/(1-d)) / (1 - sqrt(2/(1-d^2)) d)``."""
    if delta < 0 or delta >= 1:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    root = math.sqrt(2.0 / (1.0 - delta**2))
    denom = 1.0 - root * delta
    if denom <= 0:
        raise DomainError(f"C_delta undefined at delta={delta}: denominator {denom} <= 0")
    return 1.1 * (root + 1.0 / (1.0 - delta)) / denom


def _feasibility(omega, delta, nu, c):
    # sin(w) >= C [d tan(w) + (1+d) nu sec(w)], multiplied through by cos(w) >= 0
    return math.sin(omega) * math.cos(omega) - c * (delta * math.sin(omega) + (1.0 + delta) * nu)


def omega_sup(delta, nu, return_flag=False):
    """Largest angle ``w < pi/2`` with ``w >= arcsin(C_d [d tan w + (1+d) nu sec w])``.

    Found by a scan over 10**4 grid points of ``[0, pi/2]`` followed by
    bisection to 1e-10 on the bracket above the last feasible grid point.
    Returns 0 when no grid point is feasible; with ``return_flag=True`` the
    result is ``(omega, feasible)``.
    """
    if delta < 0 or nu < 0:
        raise ValueError("delta and nu must be nonnegative")
    c = c_delta(delta)
    grid = _OMEGA_GRID
    ok = _SIN_COS_GRID - c * (delta * _SIN_GRID + (1.0 + delta) * nu) >= 0
    if not ok.any():
        return (0.0, False) if return_flag else 0.0
    last = int(np.flatnonzero(ok)[-1])
    if last == grid.size - 1:
        omega = np.pi / 2
    else:
        lo, hi = grid[last], grid[last + 1]
        lo, hi = float(lo), float(hi)
        while hi - lo > OMEGA_BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if _feasibility(mid, delta, nu, c) >= 0:
                lo = mid
            else:
                hi = mid
        omega = lo
    return (float(omega), True) if return_flag else float(omega)


def m_delta_nu(delta, nu):
    """``2 (delta + nu + delta nu)``."""
    if delta < 0 or nu < 0:
        raise ValueError("delta and nu must be nonnegative")
    return 2.0 * (delta + nu + delta * nu)


def perturbation_level(delta, nu):
    """``delta + nu + delta nu``, the additive error of the adjoint image."""
    return delta + nu + delta * nu


def sin2_lower_bound(delta, nu):
    """``1 - C_d^2 (d + 2 d nu + 2 nu)^2``, a lower bound on ``sin(omega_sup)``."""
    return 1.0 - c_delta(delta) ** 2 * (delta + 2 * delta * nu + 2 * nu) ** 2


def support_threshold(delta, nu):
    """Entries of ``u`` at least this large must be picked up by the row selection."""
    return m_delta_nu(delta, nu)


def angle_bound(pu, pv_perp, delta, nu):
    """Upper bound on ``sin(angle(v0, v))`` from the support capture of the initializer.

    ``pu = ||P_J1 u||``, ``pv_perp = ||P_J2^perp v||``. Returns ``inf`` when
    the denominator ``pu - (delta + nu + delta nu)`` is not positive.
    """
    e = perturbation_level(delta, nu)
    denom = pu - e
    if denom <= 0:
        return math.inf
    return (pu * pv_perp + e) / denom


def sufficient_condition(pu, pv, delta, nu):
    """Whether the captured mass certifies ``sin(angle(v0, v)) < sin(omega_sup)``.

    ``pu = ||P_J1 u||``, ``pv = ||P_J2 v||``. Evaluates
    ``pu^2 < (s pu - (1 + s) e)^2 + pu^2 pv^2`` with ``s = sin(omega_sup)``
    and ``e = delta + nu + delta nu``, together with ``s pu - (1 + s) e > 0``,
    the sign condition under which the squared form is equivalent to the
    angle bound lying below ``s``.
    """
    s = math.sin(omega_sup(delta, nu))
    e = perturbation_level(delta, nu)
    first = s * pu - (1.0 + s) * e
    if first <= 0:
        return False
    return pu**2 < first**2 + pu**2 * pv**2


@dataclass
class TheoryReport:
    delta: float
    nu: float
    c_delta: float
    omega_sup: float
    sin_omega_sup: float
    m_delta_nu: float
    angle_bound: float
    condition_holds: bool
    lemma_regime: bool
    recovery_regime: bool

    def as_dict(self):
        return asdict(self)

    def format(self):
        rows = self.as_dict()
        width = max(map(len, rows))
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows.items())


def theory_report(delta, nu, pu=1.0, pv=1.0):
    """Evaluate every closed-form quantity at ``(delta, nu)``.

    ``pu``/``pv`` are the captured masses ``||P_J1 u||`` and ``||P_J2 v||``
    (perfect capture by default).
    """
    omega = omega_sup(delta, nu)
    pv_perp = math.sqrt(max(0.0, 1.0 - pv**2))
    return TheoryReport(
        delta=float(delta),
        nu=float(nu),
        c_delta=c_delta(delta),
        omega_sup=omega,
        sin_omega_sup=math.sin(omega),
        m_delta_nu=m_delta_nu(delta, nu),
        angle_bound=angle_bound(pu, pv_perp, delta, nu),
        condition_holds=sufficient_condition(pu, pv, delta, nu),
        lemma_regime=delta <= LEMMA_THRESHOLD and nu <= LEMMA_THRESHOLD,
        recovery_regime=delta <= RECOVERY_THRESHOLD and nu <= RECOVERY_THRESHOLD,
    )


def _complex_normal(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _random_sparse_low_rank(rng, n1, n2, s1, s2, r):
    rows = rng.choice(n1, size=s1, replace=False)
    cols = rng.choice(n2, size=s2, replace=False)
    block = _complex_normal(rng, (s1, r)) @ _complex_normal(rng, (r, s2))
    return rows, cols, block / np.linalg.norm(block)


def _restricted_energy(op, rows, cols, block):
    sub = op.matrices[:, rows][:, :, cols]
    meas = np.einsum("lij,ij->l", sub.conj(), block)
    return float(np.vdot(meas, meas).real)


def estimate_rip_constant(op, s1, s2, r, trials, seed):
    """Monte Carlo lower bound on the ``(s1, s2, r)`` restricted isometry constant.

    Draws ``trials`` unit-Frobenius matrices of rank ``r`` supported on
    uniformly random ``s1`` rows and ``s2`` columns, and returns the largest
    observed ``| ||A(X)||^2 - 1 |``. Trial ``t`` uses its own stream derived
    from ``(seed, t)``, so a larger budget only adds test matrices.
    """
    if r not in (1, 2):
        raise ValueError(f"r must be 1 or 2, got {r}")
    if trials < 1:
        raise ValueError("trials must be positive")
    s1, s2 = min(s1, op.n1), min(s2, op.n2)
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed) % 2**64, spawn_key=(t,)))
        rows, cols, block = _random_sparse_low_rank(rng, op.n1, op.n2, s1, s2, r)
        worst = max(worst, abs(_restricted_energy(op, rows, cols, block) - 1.0))
    return worst


def exhaustive_rip_constant(op, s1, s2, fillings, seed):
    """Rank-one RIP estimate enumerating every row/column support (toy sizes only).

    For each of the ``C(n1, s1) C(n2, s2)`` supports, ``fillings`` random
    rank-one matrices plus the support's own extremal singular directions are
    tested. Still a lower bound, but much tighter than random supports.
    """
    if op.n1 > 6 or op.n2 > 6 or s1 > 2 or s2 > 2:
        raise ValueError("exhaustive mode is limited to n1, n2 <= 6 and s1, s2 <= 2")
    rng = make_rng(seed)
    worst = 0.0
    for rows in itertools.combinations(range(op.n1), s1):
        for cols in itertools.combinations(range(op.n2), s2):
            rows_a, cols_a = np.array(rows), np.array(cols)
            sub = op.matrices[:, rows_a][:, :, cols_a].reshape(op.m, -1)
            # extremes of ||A(X)||^2 over all (not only rank-one) X on this support
            ev = np.linalg.eigvalsh(sub.conj().T @ sub)
            for _ in range(fillings):
                a = _complex_normal(rng, s1)
                b = _complex_normal(rng, s2)
                block = np.outer(a, b.conj())
                block /= np.linalg.norm(block)
                worst = max(worst, abs(_restricted_energy(op, rows_a, cols_a, block) - 1.0))
            if s1 == 1 or s2 == 1:
                # every matrix on a single row or column is rank one
                worst = max(worst, abs(ev[0] - 1.0), abs(ev[-1] - 1.0))
    return worst


def _check_index_set(J, n, name):
    J = np.asarray(J, dtype=int)
    if J.ndim != 1 or (J.size and (J.min() < 0 or J.max() >= n)):
        raise ValueError(f"{name} must be indices in [0, {n})")
    return J


def near_isometry_residual(op, u, v, J1, J2):
    """Spectral norm of ``P_J1 [(A^*A - I)(u v^*)] P_J2``."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    J1 = _check_index_set(J1, op.n1, "J1")
    J2 = _check_index_set(J2, op.n2, "J2")
    resid = adjoint(op, apply_rank_one(op, u, v)) - np.outer(u, v.conj())
    block = resid[np.ix_(J1, J2)]
    if block.size == 0:
        return 0.0
    return float(np.linalg.norm(block, 2))


def adjoint_noise_norm(op, z, J1, J2):
    """Spectral norm of ``P_J1 A^*(z) P_J2``."""
    J1 = _check_index_set(J1, op.n1, "J1")
    J2 = _check_index_set(J2, op.n2, "J2")
    block = adjoint(op, z)[np.ix_(J1, J2)]
    if block.size == 0:
        return 0.0
    return float(np.linalg.norm(block, 2))

