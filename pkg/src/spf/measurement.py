"""Complex Gaussian lifted measurement operator.

The operator maps an ``n1 x n2`` complex matrix ``X`` to the vector of
``m`` inner products ``trace(A_l^* X)``. Bilinear measurements of a pair
``(x, y)`` are obtained by lifting to ``X = x y^*``.

All arrays are stored as ``complex128``. The matrices ``A_l`` live in a
single read-only array of shape ``(m, n1, n2)``.
"""
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MeasurementOperator",
    "new_gaussian_operator",
    "make_rng",
    "apply",
    "apply_rank_one",
    "adjoint",
    "f_matrix",
    "g_matrix",
    "f_apply",
    "g_apply",
    "dump_operator",
    "load_operator",
    "DUMP_VERSION",
]

DUMP_VERSION = 1
_HEADER = struct.Struct("<4I")


def make_rng(seed):
    """Counter-based generator keyed by ``seed`` (Philox).

    Used everywhere a seeded stream is needed so that any derived job can be
    replayed on its own, independently of scheduling.
    """
    return np.random.Generator(np.random.Philox(int(seed) % 2**64))


def _check_dims(**dims):
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """The ``m`` matrices defining the operator, plus the data needed to regenerate them."""

    n1: int
    n2: int
    m: int
    matrices: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        _check_dims(n1=self.n1, n2=self.n2, m=self.m)
        mats = np.asarray(self.matrices, dtype=np.complex128)
        if mats.shape != (self.m, self.n1, self.n2):
            raise ValueError(
                f"matrices have shape {mats.shape}, expected {(self.m, self.n1, self.n2)}"
            )
        if not np.all(np.isfinite(mats)):
            raise ValueError("measurement matrices must be finite")
        if mats is self.matrices:
            mats = mats.copy()
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def shape(self):
        return (self.n1, self.n2)

    def __len__(self):
        return self.m

    def __getitem__(self, idx):
        return self.matrices[idx]

    def apply(self, X):
        return apply(self, X)

    def adjoint(self, b):
        return adjoint(self, b)

    def apply_rank_one(self, x, y):
        return apply_rank_one(self, x, y)


def new_gaussian_operator(n1, n2, m, seed):
    """Draw ``m`` i.i.d. matrices with entries ``CN(0, 1/m)``.

    Real and imaginary parts are independent ``N(0, 1/(2m))``, so every entry
    has ``E|a|^2 = 1/m`` and ``E ||A(X)||^2 = ||X||_F^2``.
    """
    _check_dims(n1=n1, n2=n2, m=m)
    n1, n2, m = int(n1), int(n2), int(m)
    rng = make_rng(seed)
    parts = rng.standard_normal((m, n1, n2, 2))
    mats = (parts[..., 0] + 1j * parts[..., 1]) * np.sqrt(0.5 / m)
    return MeasurementOperator(n1, n2, m, mats, seed=int(seed))


def _as_vector(x, n, name):
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {x.shape}")
    return x


def apply(op, X):
    """``(A(X))_l = trace(A_l^* X) = sum_ij conj(A_l[i, j]) X[i, j]``."""
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != op.shape:
        raise ValueError(f"X must have shape {op.shape}, got {X.shape}")
    flat = op.matrices.reshape(op.m, -1)
    return flat.conj() @ X.reshape(-1)


def apply_rank_one(op, x, y):
    """``A(x y^*)`` computed without forming the outer product."""
    x = _as_vector(x, op.n1, "x")
    y = _as_vector(y, op.n2, "y")
    # sum_ij conj(A_l[i,j]) x_i conj(y_j) = conj( sum_ij A_l[i,j] conj(x_i) y_j )
    return np.conj(np.einsum("i,lij,j->l", x.conj(), op.matrices, y, optimize=True))


def adjoint(op, b):
    """``A^*(b) = sum_l b_l A_l``."""
    b = _as_vector(b, op.m, "b")
    flat = op.matrices.reshape(op.m, -1)
    return (b @ flat).reshape(op.shape)


def f_matrix(op, y):
    """``F(y)``: the ``m x n1`` matrix whose row ``l`` is ``y^* A_l^*``.

    Satisfies ``F(y) @ x == A(x y^*)``.
    """
    y = _as_vector(y, op.n2, "y")
    return np.conj(op.matrices @ y)


def g_matrix(op, x):
    """``G(x)``: the ``m x n2`` matrix whose row ``l`` is ``x^* A_l``.

    Satisfies ``conj(G(x) @ y) == A(x y^*)``.
    """
    x = _as_vector(x, op.n1, "x")
    return np.einsum("i,lij->lj", x.conj(), op.matrices, optimize=True)


def f_apply(op, y, x):
    """Matrix-free ``F(y) @ x``."""
    return apply_rank_one(op, x, y)


def g_apply(op, x, y):
    """Matrix-free ``G(x) @ y``."""
    return np.conj(apply_rank_one(op, x, y))


def dump_operator(op, path):
    """Write the raw matrices.

    Layout: 16-byte header of four little-endian ``uint32`` values
    ``(n1, n2, m, version)``, then for each matrix its entries in row-major
    order as interleaved ``(re, im)`` little-endian float64 pairs.
    """
    payload = np.ascontiguousarray(op.matrices).view("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(op.n1, op.n2, op.m, DUMP_VERSION))
        fh.write(payload.astype("<f8", copy=False).tobytes(order="C"))


def load_operator(path, seed=None):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        n1, n2, m, version = _HEADER.unpack(header)
        if version != DUMP_VERSION:
            raise ValueError(f"{path}: unsupported dump version {version}")
        raw = np.frombuffer(fh.read(), dtype="<f8")
    expected = 2 * n1 * n2 * m
    if raw.size != expected:
        raise ValueError(f"{path}: expected {expected} float64 values, found {raw.size}")
    mats = (raw[0::2] + 1j * raw[1::2]).reshape(m, n1, n2)
    return MeasurementOperator(n1, n2, m, mats, seed=seed)
