"""Test-signal generators, noise synthesis and error metrics."""
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DegenerateInputError
from .measurement import apply_rank_one, make_rng

__all__ = [
    "ProblemInstance",
    "squared_modulus",
    "k_largest_norm",
    "gen_peaky_vector",
    "gen_k_peaky_vector",
    "noise_for_ratio",
    "noise_ratio",
    "make_instance",
    "sin_angle",
    "rank_one_distance",
    "rel_error",
]


def squared_modulus(x):
    """``|x|^2`` as ``re^2 + im^2``; skips the square root inside ``abs``."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return x.real**2 + x.imag**2
    return np.asarray(x, dtype=float) ** 2


def k_largest_norm(x, k):
    """l2 norm of the ``k`` largest-modulus entries of ``x``."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    if not 1 <= k <= x.size:
        raise ValueError(f"k must lie in [1, {x.size}], got {k}")
    mag2 = np.sort(squared_modulus(x))[::-1]
    return float(np.sqrt(mag2[:k].sum()))


def _random_phases(rng, size):
    return np.exp(2j * np.pi * rng.random(size))


def _place(n, support, values):
    out = np.zeros(n, dtype=np.complex128)
    out[support] = values
    return out


def gen_k_peaky_vector(n, s, k, xi, seed, tail="equal"):
    """Unit-norm ``s``-sparse vector with ``||x||_[k] = xi`` exactly.

    The ``k`` head entries share modulus ``xi / sqrt(k)``. The remaining
    ``s - k`` support entries carry the leftover mass ``1 - xi**2``; with
    ``tail="equal"`` they share one modulus, with ``tail="gaussian"`` their
    moduli are drawn from a Rayleigh-like law and rescaled (resampled until
    none exceeds the head modulus). Support, head positions and phases are
    drawn from ``seed``.
    """
    if not (1 <= k <= s <= n):
        raise ValueError(f"need 1 <= k <= s <= n, got k={k}, s={s}, n={n}")
    if not (np.sqrt(k / s) - 1e-12 <= xi <= 1.0):
        raise ValueError(f"xi={xi} infeasible for k={k}, s={s}: need sqrt(k/s) <= xi <= 1")
    if tail not in ("equal", "gaussian"):
        raise ValueError(f"unknown tail mode {tail!r}")
    xi = min(max(xi, np.sqrt(k / s)), 1.0)
    rng = make_rng(seed)
    support = rng.choice(n, size=s, replace=False)
    head_mod = xi / np.sqrt(k)
    rest = max(1.0 - xi**2, 0.0)
    n_tail = s - k
    if n_tail == 0 or rest == 0.0:
        tail_mod = np.zeros(n_tail)
    elif tail == "equal":
        tail_mod = np.full(n_tail, np.sqrt(rest / n_tail))
    else:
        for _ in range(1000):
            g = np.abs(rng.standard_normal(n_tail) + 1j * rng.standard_normal(n_tail))
            tail_mod = g * np.sqrt(rest) / np.linalg.norm(g)
            if tail_mod.max() <= head_mod:
                break
        else:
            raise ValueError("could not draw a gaussian tail below the head modulus")
    moduli = np.concatenate([np.full(k, head_mod), tail_mod])
    values = moduli * _random_phases(rng, s)
    # support is already a uniformly random ordering, so the head lands on random positions
    return _place(n, support, values)


def gen_peaky_vector(n, s, mu, seed, tail="equal"):
    """Unit-norm ``s``-sparse vector whose largest entry has modulus ``mu``."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    if not (1.0 / np.sqrt(s) - 1e-12 <= mu <= 1.0):
        raise ValueError(f"mu={mu} infeasible for s={s}: need 1/sqrt(s) <= mu <= 1")
    return gen_k_peaky_vector(n, s, 1, mu, seed, tail=tail)


def noise_ratio(op, u, v, z):
    """``||z|| / ||A(u v^*)||``."""
    return float(np.linalg.norm(z) / np.linalg.norm(apply_rank_one(op, u, v)))


def noise_for_ratio(op, u, v, nu_target, seed):
    """Isotropic complex Gaussian noise rescaled so that ``||z|| / ||A(uv^*)|| = nu_target``."""
    if nu_target < 0:
        raise ValueError("nu_target must be nonnegative")
    signal = np.linalg.norm(apply_rank_one(op, u, v))
    if signal == 0:
        raise DegenerateInputError("A(u v^*) is zero; noise ratio undefined")
    rng = make_rng(seed)
    g = rng.standard_normal(op.m) + 1j * rng.standard_normal(op.m)
    return nu_target * signal * g / np.linalg.norm(g)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Planted factors, noise and observations for one recovery problem.

    ``params`` is the flat, regenerable generation record.
    """

    u: np.ndarray
    v: np.ndarray
    z: np.ndarray
    b: np.ndarray
    params: dict

    def to_record(self):
        return dict(self.params)


@dataclass(frozen=True)
class _InstanceParams:
    n1: int
    n2: int
    m: int
    s1: int
    s2: int
    k: int
    xi: float
    mu: float
    nu: float
    u_seed: int
    v_seed: int
    noise_seed: int


def make_instance(op, s1, s2, k, xi, mu, nu, u_seed, v_seed, noise_seed, tail="equal"):
    """Draw a planted problem ``b = A(u v^*) + z``.

    ``u`` is k-peaky with ``||u||_[k] = xi``; ``v`` is peaky with
    ``||v||_inf = mu``; ``z`` has noise-to-signal ratio ``nu``.
    """
    u = gen_k_peaky_vector(op.n1, s1, k, xi, u_seed, tail=tail)
    v = gen_peaky_vector(op.n2, s2, mu, v_seed, tail=tail)
    z = noise_for_ratio(op, u, v, nu, noise_seed)
    b = apply_rank_one(op, u, v) + z
    params = asdict(
        _InstanceParams(op.n1, op.n2, op.m, s1, s2, k, xi, mu, nu, u_seed, v_seed, noise_seed)
    )
    params["op_seed"] = op.seed
    return ProblemInstance(u, v, z, b, params)


def sin_angle(a, b):
    """Sine of the angle between the lines spanned by ``a`` and ``b``."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("sin_angle is undefined for zero vectors")
    a, b = a / na, b / nb
    # ||b - <a,b> a|| is better conditioned than sqrt(1 - |<a,b>|^2) for small angles
    resid = b - np.vdot(a, b) * a
    return float(min(np.linalg.norm(resid), 1.0))


def rank_one_distance(a, b, c, d):
    """``||a b^* - c d^*||_F`` without forming either outer product.

    Both differences are written as ``[a c] diag(1, -1) [b d]^*``; thin QR
    factors of the two ``n x 2`` blocks reduce this to a 2 x 2 product, which
    keeps full relative accuracy when the two rank-one matrices nearly agree.
    """
    left = np.column_stack([a, c]).astype(np.complex128)
    right = np.column_stack([b, d]).astype(np.complex128)
    r_left = np.linalg.qr(left, mode="r")
    r_right = np.linalg.qr(right, mode="r")
    core = r_left @ np.diag([1.0, -1.0]) @ r_right.conj().T
    return float(np.linalg.norm(core))


def rel_error(X_hat, u, v):
    """``||X_hat - u v^*||_F / ||u v^*||_F``.

    ``X_hat`` is either a dense matrix or a factor pair ``(u_hat, v_hat)``;
    the factored form never materialises an ``n1 x n2`` matrix.
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    scale = np.linalg.norm(u) * np.linalg.norm(v)
    if scale == 0:
        raise ValueError("ground truth u v^* is zero")
    if isinstance(X_hat, tuple):
        u_hat, v_hat = X_hat
        return float(rank_one_distance(u_hat, v_hat, u, v) / scale)
    X_hat = np.asarray(X_hat)
    return float(np.linalg.norm(X_hat - np.outer(u, v.conj())) / scale)
