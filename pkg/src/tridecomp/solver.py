"""Modified alternating least squares (MALS) for the triple decomposition."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import _mals
from ._mals import SolverConfig, SolveTrace, prox_ridge
from .rank import constructive_triple, mid_dim, pad_triple
from .tensor import TripleFactors, as_tensor3, build_contraction, fold, frobenius_norm, unfold

__all__ = [
    "SolverConfig",
    "SolveTrace",
    "TripleModel",
    "update_block",
    "triple_gradient",
    "mals_decompose",
    "SweepPoint",
    "rank_sweep",
    "SWEEP_EPS",
]

_BLOCK_INDEX = {"A": 0, "B": 1, "C": 2}
# Default stopping threshold for rank sweeps. A sweep reports the error a rank
# can reach, so it is run much closer to convergence than a plain fit: at
# eps = 1e-8 an exactly representable tensor still shows errors near 1e-9.
SWEEP_EPS = 1e-12
# (contraction kind, unfolding mode) for each block
_DESIGN = (("F", 1), ("G", 2), ("H", 3))


def _design_matrix(idx, blocks):
    A, B, C = blocks
    kind = _DESIGN[idx][0]
    if kind == "F":
        return build_contraction("F", B, C)
    if kind == "G":
        return build_contraction("G", A, C)
    return build_contraction("H", A, B)


class TripleModel:
    """Block structure of ``f(A, B, C) = ||X - ABC||_F^2`` for the MALS loop."""

    block_names = ("A", "B", "C")

    def block_shapes(self, dims, r):
        n1, n2, n3 = dims
        return [(n1, r, r), (r, n2, r), (r, r, n3)]

    def blocks_of(self, factors):
        if not isinstance(factors, TripleFactors):
            factors = TripleFactors(*factors)
        return factors.blocks()

    def pack(self, blocks):
        return TripleFactors(*blocks)

    def init_blocks(self, rng, dims, r, norm):
        scale = (norm / (r * np.sqrt(np.prod(dims)))) ** (1.0 / 3.0)
        return [rng.standard_normal(shape) * scale for shape in self.block_shapes(dims, r)]

    def constructive(self, X, r):
        factors = constructive_triple(X)
        if r < factors.rank:
            raise ValueError(
                f"the constructive start needs rank >= mid dimension {factors.rank}, got {r}"
            )
        return pad_triple(factors, r).blocks()

    def update(self, idx, blocks, X, lam):
        mode = _DESIGN[idx][1]
        M = _design_matrix(idx, blocks)
        current = blocks[idx]
        Y = prox_ridge(unfold(X, mode), M, unfold(current, mode), lam)
        return fold(Y, mode, current.shape)

    def full(self, blocks):
        A, B, C = blocks
        return fold(unfold(A, 1) @ build_contraction("F", B, C), 1, (A.shape[0], B.shape[1], C.shape[2]))

    def gradient(self, blocks, X):
        return triple_gradient(TripleFactors(*blocks), X)


def triple_gradient(factors, X):
    """Block gradients ``2 (A_(1) F - X_(1)) F^T`` etc., in unfolded form."""
    blocks = factors.blocks()
    grads = []
    for idx, current in enumerate(blocks):
        mode = _DESIGN[idx][1]
        M = _design_matrix(idx, blocks)
        grads.append(2.0 * (unfold(current, mode) @ M - unfold(X, mode)) @ M.T)
    return grads


def update_block(kind, current, X, lam):
    """Proximal least-squares update of one block (no extrapolation).

    Returns the exact minimizer of ``||ABC - X||^2 + lam ||block - block_k||^2``
    over the chosen block with the other two held at ``current``.
    """
    if kind not in _BLOCK_INDEX:
        raise ValueError(f"kind must be 'A', 'B' or 'C', got {kind!r}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    X = as_tensor3(X)
    if X.shape != current.dims:
        raise ValueError(f"factors describe {current.dims}, data is {X.shape}")
    return TripleModel().update(_BLOCK_INDEX[kind], current.blocks(), X, lam)


def _warn_rank(dims, r):
    if r > mid_dim(dims):
        warnings.warn(
            f"rank {r} exceeds mid{{n1, n2, n3}} = {mid_dim(dims)}; an exact "
            "decomposition already exists at the mid dimension",
            stacklevel=3,
        )


def mals_decompose(X, cfg, extra_starts=()):
    """Fit triple factors of rank ``cfg.rank`` to ``X``.

    Runs ``cfg.restarts`` independent starts (plus any ``extra_starts``, each
    a :class:`TripleFactors`) and returns the factors and trace of the run
    with the lowest final objective.

    Returns
    -------
    factors : TripleFactors
    trace : SolveTrace
    """
    X = as_tensor3(X)
    _warn_rank(X.shape, cfg.rank)
    model = TripleModel()
    extra = [model.blocks_of(s) for s in extra_starts]
    best = _mals.decompose(model, X, cfg, extra_starts=extra)
    return model.pack(best.blocks), best.trace


@dataclass
class SweepPoint:
    rank: int
    relative_error: float
    iterations: int
    seconds: float
    factors: TripleFactors
    trace: SolveTrace


def rank_sweep(X, ranks, cfg=None, warm_start=True, lazy=False):
    """Best relative error of a rank-``r`` triple fit for every ``r`` in ``ranks``.

    Each rank uses the random starts from ``cfg`` (only ``cfg.rank`` is
    overridden); without ``cfg`` the defaults apply except ``eps``, which is
    :data:`SWEEP_EPS`. With ``warm_start`` the previous rank's solution, zero-padded,
    is one more candidate, which makes the curve non-increasing over
    increasing ranks. For ``r >= mid{n1, n2, n3}`` the constructive exact
    decomposition is always a candidate.
    """
    X = as_tensor3(X)
    ranks = [int(r) for r in ranks]
    if not ranks or min(ranks) < 1:
        raise ValueError(f"ranks must be a non-empty list of positive integers, got {ranks}")
    base = cfg if cfg is not None else SolverConfig(rank=1, eps=SWEEP_EPS)
    points = _sweep(X, ranks, base, warm_start)
    return points if lazy else list(points)


def _sweep(X, ranks, base, warm_start):
    norm = frobenius_norm(X)
    mid = mid_dim(X.shape)
    exact = constructive_triple(X) if np.any(X) else None
    previous = None
    for r in ranks:
        cfg = SolverConfig(
            **{**base.__dict__, "rank": r, "init": "random-gaussian", "init_factors": None}
        )
        extra = []
        if warm_start and previous is not None and previous.rank <= r:
            extra.append(pad_triple(previous, r))
        if exact is not None and r >= mid:
            extra.append(pad_triple(exact, r))
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            factors, trace = mals_decompose(X, cfg, extra_starts=extra)
        seconds = time.perf_counter() - t0
        rel = frobenius_norm(X - factors.full()) / norm if norm > 0 else 0.0
        previous = factors
        yield SweepPoint(r, rel, trace.iterations, seconds, factors, trace)
