"""Rank diagnostics and exact constructions for triple decompositions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import CPFactors, TripleFactors, as_tensor3, unfold

__all__ = [
    "tucker_rank",
    "mid_dim",
    "permute_triple",
    "pad_triple",
    "constructive_triple",
    "cp_to_triple",
    "RankBound",
    "triple_rank_upper_bound",
]

DEFAULT_RANK_TOL = 1e-10

# Factor k of a triple product carries the outer index of mode k plus one
# internal index shared with each of the other two factors.
_OUTER = "ijt"
_SHARED = {frozenset((0, 1)): "s", frozenset((0, 2)): "q", frozenset((1, 2)): "p"}
_LAYOUT = ("iqs", "pjs", "pqt")


def mid_dim(dims):
    return sorted(int(n) for n in dims)[1]


def tucker_rank(X, tol=DEFAULT_RANK_TOL):
    """Numerical ranks ``(r1, r2, r3)`` of the three unfoldings of ``X``.

    A singular value counts when it exceeds ``tol`` times the largest singular
    value of its unfolding. ``tol=0`` falls back to the machine-precision
    threshold of :func:`numpy.linalg.matrix_rank`.
    """
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    X = as_tensor3(X)
    ranks = []
    for mode in (1, 2, 3):
        M = unfold(X, mode)
        if tol == 0:
            ranks.append(int(np.linalg.matrix_rank(M)))
            continue
        sv = np.linalg.svd(M, compute_uv=False)
        ranks.append(int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0)
    return tuple(ranks)


def permute_triple(factors, perm):
    """Triple factors of ``triple_product(factors).transpose(perm)``.

    Mode permutations only relabel which factor plays which role; the
    internal indices are transposed to match the new pairing.
    """
    perm = tuple(int(k) for k in perm)
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"perm must be a permutation of (0, 1, 2), got {perm}")
    old = factors.blocks()
    new = []
    for k in range(3):
        src = perm[k]
        tgt = "".join(
            _OUTER[src] if slot == k else _SHARED[frozenset((src, perm[slot]))]
            for slot in _slots(k)
        )
        new.append(np.einsum(f"{_LAYOUT[src]}->{tgt}", old[src]))
    return TripleFactors(*new)


def _slots(k):
    # Axis roles of factor k in its layout: which factor each internal axis
    # pairs with, and k itself for the outer axis.
    return {0: (0, 2, 1), 1: (2, 1, 0), 2: (1, 0, 2)}[k]


def pad_triple(factors, rank):
    """Zero-pad factors to a larger rank; the product is unchanged."""
    r = factors.rank
    if rank < r:
        raise ValueError(f"cannot pad rank {r} factors down to {rank}")
    n1, n2, n3 = factors.dims
    A = np.zeros((n1, rank, rank))
    B = np.zeros((rank, n2, rank))
    C = np.zeros((rank, rank, n3))
    A[:, :r, :r] = factors.A
    B[:r, :, :r] = factors.B
    C[:r, :r, :] = factors.C
    return TripleFactors(A, B, C)


def constructive_triple(X):
    """Exact triple factors of ``X`` with rank ``mid{n1, n2, n3}``.

    In the sorted case ``n1 >= n2 >= n3`` with ``r = n2`` this sets
    ``a[i,q,s] = x[i,s,q]`` for ``q < n3`` (zero otherwise) and
    ``b[p,j,s] = delta(j,s) / sqrt(r)``, ``c[p,q,t] = delta(q,t) / sqrt(r)``.
    Other orderings are permuted to the sorted case (stable descending
    sort) and the factors permuted back.
    """
    X = as_tensor3(X)
    perm = tuple(sorted(range(3), key=lambda k: -X.shape[k]))
    Y = X.transpose(perm)
    m1, m2, m3 = Y.shape
    r = m2
    A = np.zeros((m1, r, r))
    A[:, :m3, :] = Y.transpose(0, 2, 1)
    w = 1.0 / np.sqrt(r)
    B = np.broadcast_to(np.eye(r)[None, :, :] * w, (r, m2, r)).copy()
    C = np.broadcast_to(np.eye(r, m3)[None, :, :] * w, (r, r, m3)).copy()
    return permute_triple(TripleFactors(A, B, C), np.argsort(perm))


def cp_to_triple(factors):
    """Embed CP factors as diagonal triple factors of the same rank."""
    if not isinstance(factors, CPFactors):
        factors = CPFactors(*factors)
    r = factors.rank
    eye = np.eye(r)
    A = factors.A[:, :, None] * eye[None, :, :]
    B = eye[:, None, :] * factors.B[None, :, :]
    C = eye[:, :, None] * factors.C.T[None, :, :]
    return TripleFactors(A, B, C)


@dataclass
class RankBound:
    """Outcome of a rank sweep: ``TriRank(X) <= rank`` at ``tolerance``."""

    rank: int
    relative_error: float
    tolerance: float
    curve: list

    def __str__(self):
        return f"TriRank <= {self.rank} at relative error {self.tolerance:g}"


def triple_rank_upper_bound(X, target_rel_err, cfg=None, stop_early=True):
    """Smallest swept rank whose best relative error is at most ``target_rel_err``.

    Ranks ``1 .. mid{n1, n2, n3}`` are swept in order; the last one always
    qualifies thanks to the constructive candidate. This is an upper bound on
    the triple rank at the given tolerance, never an exact rank. The zero
    tensor reports rank 0 without solving anything.
    """
    from .solver import rank_sweep

    if not target_rel_err > 0:
        raise ValueError(f"target_rel_err must be positive, got {target_rel_err}")
    X = as_tensor3(X)
    if not np.any(X):
        return RankBound(rank=0, relative_error=0.0, tolerance=target_rel_err, curve=[])
    ranks = list(range(1, mid_dim(X.shape) + 1))
    if not stop_early:
        curve = rank_sweep(X, ranks, cfg)
    else:
        curve = []
        for point in rank_sweep(X, ranks, cfg, lazy=True):
            curve.append(point)
            if point.relative_error <= target_rel_err:
                break
    for point in curve:
        if point.relative_error <= target_rel_err:
            return RankBound(point.rank, point.relative_error, target_rel_err, curve)
    last = curve[-1]
    return RankBound(last.rank, last.relative_error, target_rel_err, curve)
