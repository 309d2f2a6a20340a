"""Embedded example data and seeded synthetic low-rank tensors."""

from __future__ import annotations

import numpy as np

from .tensor import CPFactors, TripleFactors, TuckerFactors

__all__ = [
    "example_factors",
    "example_tensor",
    "random_triple",
    "random_cp",
    "random_tucker",
    "SYNTHETIC_KINDS",
    "synthetic_tensor",
]


def example_factors():
    """Rank-2 triple factors of a 4 x 4 x 4 tensor whose Tucker rank is (4, 4, 4).

    Each factor has four unit entries and zeros elsewhere.
    """
    A = np.zeros((4, 2, 2))
    B = np.zeros((2, 4, 2))
    C = np.zeros((2, 2, 4))
    # 1-based (a_iqs, b_pjs, c_pqt) positions of the unit entries
    for i, q, s in [(1, 1, 1), (2, 1, 2), (3, 2, 1), (4, 2, 2)]:
        A[i - 1, q - 1, s - 1] = 1.0
    for p, j, s in [(1, 1, 1), (1, 2, 2), (2, 3, 1), (2, 4, 2)]:
        B[p - 1, j - 1, s - 1] = 1.0
    for p, q, t in [(1, 1, 1), (1, 2, 2), (2, 1, 3), (2, 2, 4)]:
        C[p - 1, q - 1, t - 1] = 1.0
    return TripleFactors(A, B, C)


def example_tensor():
    """The 4 x 4 x 4 product of :func:`example_factors` (eight unit entries)."""
    return example_factors().full()


def random_triple(dims, rank, seed=0):
    rng = np.random.default_rng(seed)
    n1, n2, n3 = dims
    r = rank
    return TripleFactors(
        rng.standard_normal((n1, r, r)),
        rng.standard_normal((r, n2, r)),
        rng.standard_normal((r, r, n3)),
    )


def random_cp(dims, rank, seed=0):
    rng = np.random.default_rng(seed)
    return CPFactors(*(rng.standard_normal((n, rank)) for n in dims))


def random_tucker(dims, ranks, seed=0):
    """Tucker factors with core shape ``ranks`` (an int means a cubic core)."""
    if np.isscalar(ranks):
        ranks = (int(ranks),) * 3
    rng = np.random.default_rng(seed)
    core = rng.standard_normal(tuple(ranks))
    U, V, W = (rng.standard_normal((n, r)) for n, r in zip(dims, ranks))
    return TuckerFactors(core, U, V, W)


SYNTHETIC_KINDS = ("example", "triple", "cp", "tucker")


def synthetic_tensor(kind, dims=None, rank=None, seed=0):
    """Dense tensor of one of :data:`SYNTHETIC_KINDS`."""
    if kind == "example":
        return example_tensor()
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"kind must be one of {SYNTHETIC_KINDS}, got {kind!r}")
    if dims is None or rank is None:
        raise ValueError(f"kind {kind!r} needs dims and rank")
    maker = {"triple": random_triple, "cp": random_cp, "tucker": random_tucker}[kind]
    return maker(tuple(int(n) for n in dims), int(rank), seed=seed).full()
