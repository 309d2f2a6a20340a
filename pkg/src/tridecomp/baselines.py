"""CP and Tucker counterparts of the triple MALS solvers.

Both use the same proximal-MALS skeleton (exact proximal least-squares block
updates, extrapolation ``gamma``), the same defaults and the same seeding, so
that comparisons against the triple model isolate the model class. The
Tucker model uses a cubic ``r x r x r`` core.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _mals
from ._mals import prox_ridge
from .recovery import recover_with_model
from .tensor import (
    CPFactors,
    TuckerFactors,
    as_tensor3,
    cp_tensor,
    khatri_rao,
    mode_product,
    tucker_apply,
    unfold,
    unvec,
    vec,
)

__all__ = [
    "CPModel",
    "TuckerModel",
    "cp_mals_decompose",
    "tucker_mals_decompose",
    "cp_mals_recover",
    "tucker_mals_recover",
]


class CPModel:
    block_names = ("A", "B", "C")

    def block_shapes(self, dims, r):
        return [(n, r) for n in dims]

    def blocks_of(self, factors):
        if not isinstance(factors, CPFactors):
            factors = CPFactors(*factors)
        return factors.blocks()

    def pack(self, blocks):
        return CPFactors(*blocks)

    def init_blocks(self, rng, dims, r, norm):
        # same draws and scale as the triple model, so the two coincide at r = 1
        scale = (norm / (r * np.sqrt(np.prod(dims)))) ** (1.0 / 3.0)
        return [rng.standard_normal(shape) * scale for shape in self.block_shapes(dims, r)]

    @staticmethod
    def _design(idx, blocks):
        A, B, C = blocks
        if idx == 0:
            return khatri_rao(C, B).T
        if idx == 1:
            return khatri_rao(C, A).T
        return khatri_rao(B, A).T

    def update(self, idx, blocks, X, lam):
        M = self._design(idx, blocks)
        return prox_ridge(unfold(X, idx + 1), M, blocks[idx], lam)

    def full(self, blocks):
        return cp_tensor(CPFactors(*blocks))

    def gradient(self, blocks, X):
        grads = []
        for idx, current in enumerate(blocks):
            M = self._design(idx, blocks)
            grads.append(2.0 * (current @ M - unfold(X, idx + 1)) @ M.T)
        return grads


class TuckerModel:
    block_names = ("U", "V", "W", "D")

    def block_shapes(self, dims, r):
        return [(n, r) for n in dims] + [(r, r, r)]

    def blocks_of(self, factors):
        if not isinstance(factors, TuckerFactors):
            factors = TuckerFactors(*factors)
        return [factors.U, factors.V, factors.W, factors.core]

    def pack(self, blocks):
        U, V, W, D = blocks
        return TuckerFactors(core=D, U=U, V=V, W=W)

    def init_blocks(self, rng, dims, r, norm):
        scale = (norm / (r ** 1.5 * np.sqrt(np.prod(dims)))) ** 0.25
        return [rng.standard_normal(shape) * scale for shape in self.block_shapes(dims, r)]

    @staticmethod
    def _design(idx, blocks):
        U, V, W, D = blocks
        if idx == 0:
            return unfold(D, 1) @ np.kron(W, V).T
        if idx == 1:
            return unfold(D, 2) @ np.kron(W, U).T
        return unfold(D, 3) @ np.kron(V, U).T

    @staticmethod
    def _project(T, blocks):
        U, V, W, _ = blocks
        return mode_product(mode_product(mode_product(T, U.T, 1), V.T, 2), W.T, 3)

    def _core_system(self, blocks):
        U, V, W, _ = blocks
        return np.kron(W.T @ W, np.kron(V.T @ V, U.T @ U))

    def update(self, idx, blocks, X, lam):
        if idx < 3:
            M = self._design(idx, blocks)
            return prox_ridge(unfold(X, idx + 1), M, blocks[idx], lam)
        # vec(X) = (W kron V kron U) vec(D)
        D = blocks[3]
        G = self._core_system(blocks)
        G[np.diag_indices_from(G)] += lam
        rhs = vec(self._project(X, blocks)) + lam * vec(D)
        sol = cho_solve(cho_factor(G, lower=True, check_finite=False), rhs, check_finite=False)
        return unvec(sol, D.shape)

    def full(self, blocks):
        return tucker_apply(self.pack(blocks))

    def gradient(self, blocks, X):
        grads = []
        for idx in range(3):
            M = self._design(idx, blocks)
            grads.append(2.0 * (blocks[idx] @ M - unfold(X, idx + 1)) @ M.T)
        grads.append(2.0 * self._project(self.full(blocks) - X, blocks))
        return grads


def cp_mals_decompose(X, cfg, extra_starts=()):
    """Rank-``cfg.rank`` CP fit by proximal MALS; returns ``(CPFactors, SolveTrace)``."""
    X = as_tensor3(X)
    model = CPModel()
    best = _mals.decompose(model, X, cfg, [model.blocks_of(s) for s in extra_starts])
    return model.pack(best.blocks), best.trace


def tucker_mals_decompose(X, cfg, extra_starts=()):
    """Tucker fit with an ``r x r x r`` core; returns ``(TuckerFactors, SolveTrace)``."""
    X = as_tensor3(X)
    model = TuckerModel()
    best = _mals.decompose(model, X, cfg, [model.blocks_of(s) for s in extra_starts])
    return model.pack(best.blocks), best.trace


def cp_mals_recover(mask, cfg, extra_starts=()):
    model = CPModel()
    return recover_with_model(model, mask, cfg, [model.blocks_of(s) for s in extra_starts])


def tucker_mals_recover(mask, cfg, extra_starts=()):
    model = TuckerModel()
    return recover_with_model(model, mask, cfg, [model.blocks_of(s) for s in extra_starts])
