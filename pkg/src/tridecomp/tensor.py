"""Dense third-order tensor algebra.

Tensors are plain ``numpy`` arrays of shape ``(n1, n2, n3)``. The linear
(vec) order runs the first index fastest, so entry ``(i, j, t)`` (0-based)
lives at ``i + j*n1 + t*n1*n2``; every unfolding below follows the same
column convention as the mode products in Kolda & Bader.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_tensor3",
    "vec",
    "unvec",
    "unfold",
    "fold",
    "TripleFactors",
    "CPFactors",
    "TuckerFactors",
    "triple_product",
    "cp_tensor",
    "tucker_apply",
    "mode_product",
    "build_contraction",
    "khatri_rao",
    "frobenius_norm",
    "relative_error",
]


def as_tensor3(X, name="X"):
    """Return ``X`` as a float64 array, checking that it is third order."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise ValueError(f"{name} must be a third-order tensor, got ndim={X.ndim}")
    if min(X.shape) < 1:
        raise ValueError(f"{name} has an empty mode: shape={X.shape}")
    return X


def vec(X):
    """Linearize a tensor with the first index running fastest."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(values, dims):
    """Inverse of :func:`vec`."""
    values = np.asarray(values, dtype=float)
    dims = tuple(int(n) for n in dims)
    if values.size != int(np.prod(dims)):
        raise ValueError(f"{values.size} values do not fill a tensor of shape {dims}")
    return values.reshape(dims, order="F")


def _check_mode(mode):
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")


def unfold(X, mode):
    """Mode-``mode`` matricization (``mode`` is 1, 2 or 3).

    The remaining two indices are merged with the lower one running fastest,
    e.g. the mode-2 unfolding has column ``i + t*n1``.
    """
    _check_mode(mode)
    X = np.asarray(X)
    if X.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={X.ndim}")
    return np.moveaxis(X, mode - 1, 0).reshape(X.shape[mode - 1], -1, order="F")


def fold(M, mode, dims):
    """Inverse of :func:`unfold` for a tensor of shape ``dims``."""
    _check_mode(mode)
    dims = tuple(int(n) for n in dims)
    M = np.asarray(M)
    k = mode - 1
    rest = dims[:k] + dims[k + 1:]
    if M.shape != (dims[k], rest[0] * rest[1]):
        raise ValueError(f"matrix of shape {M.shape} is not a mode-{mode} unfolding of {dims}")
    return np.moveaxis(M.reshape((dims[k],) + rest, order="F"), 0, k)


@dataclass(frozen=True)
class TripleFactors:
    """Factors ``(A, B, C)`` of a triple product with shared rank ``r``.

    ``A`` is ``n1 x r x r`` (entries ``a[i, q, s]``), ``B`` is ``r x n2 x r``
    (``b[p, j, s]``) and ``C`` is ``r x r x n3`` (``c[p, q, t]``).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A, B, C = (np.asarray(M, dtype=float) for M in (self.A, self.B, self.C))
        if A.ndim != 3 or B.ndim != 3 or C.ndim != 3:
            raise ValueError("triple factors must all be third-order arrays")
        r = A.shape[1]
        if r < 1:
            raise ValueError("triple rank must be at least 1")
        if A.shape[2] != r or B.shape[0] != r or B.shape[2] != r or C.shape[:2] != (r, r):
            raise ValueError(
                f"inconsistent triple factor shapes {A.shape}, {B.shape}, {C.shape}"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def rank(self):
        return self.A.shape[1]

    @property
    def dims(self):
        return (self.A.shape[0], self.B.shape[1], self.C.shape[2])

    def blocks(self):
        return [self.A, self.B, self.C]

    def full(self):
        return triple_product(self)


@dataclass(frozen=True)
class CPFactors:
    """CP factor matrices ``A`` (n1 x r), ``B`` (n2 x r), ``C`` (n3 x r)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        mats = [np.asarray(M, dtype=float) for M in (self.A, self.B, self.C)]
        if any(M.ndim != 2 for M in mats):
            raise ValueError("CP factors must be matrices")
        if len({M.shape[1] for M in mats}) != 1 or mats[0].shape[1] < 1:
            raise ValueError(f"CP factors disagree on rank: {[M.shape for M in mats]}")
        for name, M in zip("ABC", mats):
            object.__setattr__(self, name, M)

    @property
    def rank(self):
        return self.A.shape[1]

    @property
    def dims(self):
        return (self.A.shape[0], self.B.shape[0], self.C.shape[0])

    def blocks(self):
        return [self.A, self.B, self.C]

    def full(self):
        return cp_tensor(self)


@dataclass(frozen=True)
class TuckerFactors:
    """Tucker core ``core`` (r1 x r2 x r3) with factor matrices ``U, V, W``."""

    core: np.ndarray
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        core = np.asarray(self.core, dtype=float)
        mats = [np.asarray(M, dtype=float) for M in (self.U, self.V, self.W)]
        if core.ndim != 3 or any(M.ndim != 2 for M in mats):
            raise ValueError("Tucker core must be 3-D and factors must be matrices")
        if tuple(M.shape[1] for M in mats) != core.shape:
            raise ValueError(
                f"core shape {core.shape} does not match factor columns "
                f"{[M.shape[1] for M in mats]}"
            )
        object.__setattr__(self, "core", core)
        for name, M in zip("UVW", mats):
            object.__setattr__(self, name, M)

    @property
    def rank(self):
        return self.core.shape

    @property
    def dims(self):
        return (self.U.shape[0], self.V.shape[0], self.W.shape[0])

    def blocks(self):
        return [self.U, self.V, self.W, self.core]

    def full(self):
        return tucker_apply(self)


def _check_dims(factors, dims):
    if dims is not None and tuple(int(n) for n in dims) != factors.dims:
        raise ValueError(f"factors describe a {factors.dims} tensor, not {tuple(dims)}")


def build_contraction(kind, first, second):
    """Contraction matrix ``F``, ``G`` or ``H`` for the triple product.

    ``kind="F"`` takes ``(B, C)`` and returns the ``r^2 x n2*n3`` matrix with
    ``F[q + s*r, j + t*n2] = sum_p b[p,j,s] c[p,q,t]``, so that
    ``unfold(ABC, 1) == unfold(A, 1) @ F``. Likewise ``"G"`` takes ``(A, C)``
    (``unfold(ABC, 2) == unfold(B, 2) @ G``) and ``"H"`` takes ``(A, B)``
    (``unfold(ABC, 3) == unfold(C, 3) @ H``).
    """
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    if kind == "F":
        B, C = first, second
        r = B.shape[0]
        if B.shape[2] != r or C.shape[:2] != (r, r):
            raise ValueError(f"F needs B (r,n2,r) and C (r,r,n3); got {B.shape}, {C.shape}")
        T = np.einsum("pjs,pqt->qsjt", B, C)
        return T.reshape(r * r, B.shape[1] * C.shape[2], order="F")
    if kind == "G":
        A, C = first, second
        r = A.shape[1]
        if A.shape[2] != r or C.shape[:2] != (r, r):
            raise ValueError(f"G needs A (n1,r,r) and C (r,r,n3); got {A.shape}, {C.shape}")
        T = np.einsum("iqs,pqt->psit", A, C)
        return T.reshape(r * r, A.shape[0] * C.shape[2], order="F")
    if kind == "H":
        A, B = first, second
        r = A.shape[1]
        if A.shape[2] != r or B.shape[0] != r or B.shape[2] != r:
            raise ValueError(f"H needs A (n1,r,r) and B (r,n2,r); got {A.shape}, {B.shape}")
        T = np.einsum("iqs,pjs->pqij", A, B)
        return T.reshape(r * r, A.shape[0] * B.shape[1], order="F")
    raise ValueError(f"contraction kind must be 'F', 'G' or 'H', got {kind!r}")


def triple_product(factors, dims=None):
    """Evaluate ``x[i,j,t] = sum_{p,q,s} a[i,q,s] b[p,j,s] c[p,q,t]``."""
    _check_dims(factors, dims)
    F = build_contraction("F", factors.B, factors.C)
    return fold(unfold(factors.A, 1) @ F, 1, factors.dims)


def khatri_rao(left, right):
    """Column-wise Kronecker product, ``right``'s row index running fastest.

    Row ``j + t*n_right`` of ``khatri_rao(C, B)`` holds ``b[j,:] * c[t,:]``,
    matching the column order of :func:`unfold`.
    """
    left = np.asarray(left)
    right = np.asarray(right)
    if left.shape[1] != right.shape[1]:
        raise ValueError("Khatri-Rao operands need the same number of columns")
    return (left[:, None, :] * right[None, :, :]).reshape(-1, left.shape[1])


def cp_tensor(factors, dims=None):
    """Evaluate ``[[A, B, C]]``, i.e. ``sum_p a[i,p] b[j,p] c[t,p]``."""
    _check_dims(factors, dims)
    M = factors.A @ khatri_rao(factors.C, factors.B).T
    return fold(M, 1, factors.dims)


def mode_product(X, M, mode):
    """``X x_mode M``: multiply every mode-``mode`` fiber by ``M``."""
    X = np.asarray(X)
    M = np.asarray(M)
    if M.shape[1] != X.shape[mode - 1]:
        raise ValueError(
            f"cannot multiply mode {mode} of size {X.shape[mode - 1]} by a {M.shape} matrix"
        )
    dims = list(X.shape)
    dims[mode - 1] = M.shape[0]
    return fold(M @ unfold(X, mode), mode, dims)


def tucker_apply(factors, dims=None):
    """Evaluate ``D x1 U x2 V x3 W``."""
    _check_dims(factors, dims)
    X = factors.core
    for mode, M in enumerate((factors.U, factors.V, factors.W), start=1):
        X = mode_product(X, M, mode)
    return X


def frobenius_norm(X):
    return float(np.linalg.norm(np.ravel(X)))


def relative_error(approx, reference):
    """``||approx - reference||_F / ||reference||_F``.

    Raises
    ------
    ZeroDivisionError
        If ``reference`` is the zero tensor.
    """
    approx = np.asarray(approx, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if approx.shape != reference.shape:
        raise ValueError(f"shape mismatch: {approx.shape} vs {reference.shape}")
    denom = frobenius_norm(reference)
    if denom == 0.0:
        raise ZeroDivisionError("relative error is undefined for a zero reference tensor")
    return frobenius_norm(approx - reference) / denom
