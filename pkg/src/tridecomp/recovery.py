"""Low-rank tensor recovery from linear measurements ``P vec(X) = d``.

The factor model is fitted to a surrogate tensor ``X`` that is kept on the
affine set ``P vec(X) = d``; each sweep updates ``X`` in closed form and then
the factor blocks, all with the same proximal weight and extrapolation step
as the decomposition solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _mals
from ._mals import SolveTrace
from .tensor import TripleFactors, as_tensor3, frobenius_norm, unvec, vec

__all__ = [
    "SingularMaskError",
    "MaskOperator",
    "RecoveryState",
    "ProjectedGradient",
    "initial_surrogate",
    "project_feasible_update",
    "mals_recover",
    "recover_with_model",
    "projected_gradient",
    "sample_mask",
]

# reciprocal condition number below which P P^T is treated as singular
_RCOND_MIN = 1e-12


class SingularMaskError(np.linalg.LinAlgError):
    """``P P^T`` is not (numerically) invertible."""

    def __init__(self, message, cond=math.inf):
        super().__init__(message)
        self.cond = cond


@dataclass(frozen=True, eq=False)
class MaskOperator:
    """Linear sampling operator ``P`` with data ``d``.

    The usual case is an entry mask: ``observed`` holds strictly increasing
    0-based linear (vec-order) indices and ``P`` is the corresponding rows of
    the identity. Passing ``matrix`` instead gives a general dense ``P``
    (``m x n1*n2*n3``) with ``P P^T`` invertible.

    Use :meth:`from_entries` or :meth:`from_matrix` to build one.
    """

    dims: tuple
    data: np.ndarray
    observed: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        data = np.asarray(self.data, dtype=float).ravel()
        object.__setattr__(self, "data", data)
        if data.size < 1:
            raise ValueError("a mask needs at least one observation")
        if not np.all(np.isfinite(data)):
            raise ValueError("observed data must be finite")
        if (self.observed is None) == (self.matrix is None):
            raise ValueError("give exactly one of observed indices or a dense matrix")
        if self.observed is not None:
            idx = np.asarray(self.observed, dtype=np.int64).ravel()
            if idx.size != data.size:
                raise ValueError(f"{idx.size} indices but {data.size} data values")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("observed indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.size:
                raise ValueError(f"observed index out of range for dims {dims}")
            object.__setattr__(self, "observed", idx)
        else:
            P = np.asarray(self.matrix, dtype=float)
            if P.shape != (data.size, self.size):
                raise ValueError(f"P must be {data.size} x {self.size}, got {P.shape}")
            object.__setattr__(self, "matrix", P)
            gram = P @ P.T
            cond = np.linalg.cond(gram)
            if not np.isfinite(cond) or 1.0 / cond < _RCOND_MIN:
                raise SingularMaskError(f"P P^T is numerically singular (cond = {cond:.3e})", cond)
            object.__setattr__(self, "_gram", cho_factor(gram, lower=True))

    @classmethod
    def from_entries(cls, dims, indices, data):
        """Entry mask from (possibly unsorted) distinct linear indices."""
        indices = np.asarray(indices, dtype=np.int64).ravel()
        data = np.asarray(data, dtype=float).ravel()
        if indices.size != data.size:
            raise ValueError(f"{indices.size} indices but {data.size} data values")
        order = np.argsort(indices, kind="stable")
        indices, data = indices[order], data[order]
        if np.any(np.diff(indices) == 0):
            raise ValueError("duplicate observed index")
        return cls(dims=dims, data=data, observed=indices)

    @classmethod
    def from_matrix(cls, dims, P, d):
        return cls(dims=dims, data=d, matrix=P)

    @property
    def mode(self):
        return "entry-mask" if self.observed is not None else "dense-matrix"

    @property
    def size(self):
        n1, n2, n3 = self.dims
        return n1 * n2 * n3

    @property
    def m(self):
        return self.data.size

    def apply(self, v):
        """``P v``."""
        v = np.asarray(v, dtype=float).ravel()
        return v[self.observed] if self.observed is not None else self.matrix @ v

    def affine_projection(self, v):
        """Closest ``w`` to ``v`` with ``P w = d``."""
        v = np.array(v, dtype=float).ravel()
        if self.observed is not None:
            v[self.observed] = self.data
            return v
        z = cho_solve(self._gram, self.matrix @ v - self.data)
        return v - self.matrix.T @ z

    def null_projection(self, v):
        """``[I - P^T (P P^T)^{-1} P] v``."""
        v = np.array(v, dtype=float).ravel()
        if self.observed is not None:
            v[self.observed] = 0.0
            return v
        return v - self.matrix.T @ cho_solve(self._gram, self.matrix @ v)

    def residual(self, X):
        """``||P vec(X) - d||``."""
        return float(np.linalg.norm(self.apply(vec(X)) - self.data))


@dataclass
class RecoveryState:
    """Recovered surrogate tensor ``X`` (always feasible), factors and trace."""

    X: np.ndarray
    factors: object
    trace: SolveTrace

    @property
    def model_tensor(self):
        return self.factors.full()


def initial_surrogate(mask):
    """Feasible starting surrogate.

    Entry masks fill unobserved entries with the mean of ``d``; a dense ``P``
    starts from the minimum-norm solution of ``P vec(X) = d``.
    """
    if mask.observed is not None:
        v = np.full(mask.size, mask.data.mean())
        v[mask.observed] = mask.data
        return unvec(v, mask.dims)
    return unvec(mask.affine_projection(np.zeros(mask.size)), mask.dims)


def project_feasible_update(X_k, model_k, mask, lam):
    """Closed-form surrogate update.

    Minimizes ``||X - model_k||^2 + lam ||X - X_k||^2`` subject to
    ``P vec(X) = d``: the unconstrained minimizer
    ``(model_k + lam X_k) / (1 + lam)`` projected onto the affine set. For an
    entry mask this just overwrites the observed coordinates with ``d``.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    X_k = np.asarray(X_k, dtype=float)
    if X_k.shape != mask.dims or np.shape(model_k) != mask.dims:
        raise ValueError(f"tensors must have the mask shape {mask.dims}")
    v = vec(model_k + lam * X_k) / (1.0 + lam)
    return unvec(mask.affine_projection(v), mask.dims)


def recover_with_model(model, mask, cfg, extra_starts=()):
    """Best-of-starts constrained MALS for any factor model.

    Returns a :class:`RecoveryState`; shared by the triple solver and the
    CP/Tucker baselines.
    """
    X0 = initial_surrogate(mask)
    lam = cfg.resolve_lam(float(np.mean(mask.data ** 2)))
    starts = _mals.initial_starts(model, cfg, X0) + [list(s) for s in extra_starts]

    def x_step(X, Y):
        return project_feasible_update(X, Y, mask, lam)

    def solve(blocks):
        return _mals.run_mals(
            model, X0, blocks, cfg.gamma, lam, cfg.eps, cfg.max_iter,
            x_step=x_step, feasibility=mask.residual,
        )

    best, _ = _mals.best_of(starts, solve, cfg.threads)
    state = RecoveryState(X=best.X, factors=model.pack(best.blocks), trace=best.trace)
    trace = best.trace
    trace.observed_residual = mask.residual(best.model_tensor)
    dnorm = float(np.linalg.norm(mask.data))
    trace.relative_error = trace.observed_residual / dnorm if dnorm > 0 else 0.0
    trace.gradient_norm = projected_gradient(state, mask, model=model).total
    return state


def mals_recover(mask, cfg, extra_starts=()):
    """Recover a low-triple-rank tensor from the measurements in ``mask``.

    ``trace.relative_error`` is the relative misfit on the observations,
    ``||P vec(ABC) - d|| / ||d||``; compare ``state.X`` against a ground
    truth for the recovery error.
    """
    from .solver import TripleModel, _warn_rank

    _warn_rank(mask.dims, cfg.rank)
    model = TripleModel()
    extra = [model.blocks_of(s) for s in extra_starts]
    return recover_with_model(model, mask, cfg, extra_starts=extra)


@dataclass
class ProjectedGradient:
    blocks: dict
    norms: dict
    total: float


def projected_gradient(state, mask, model=None):
    """Gradient of ``||X - model||^2`` projected onto the feasible set.

    The X block is ``2 [I - P^T (P P^T)^{-1} P] vec(X - model)``; the factor
    blocks are the ordinary block gradients (they are unconstrained).
    """
    if model is None:
        model = _model_for(state.factors)
    X = as_tensor3(state.X)
    blocks = model.blocks_of(state.factors)
    grads = {"X": 2.0 * mask.null_projection(vec(X - model.full(blocks)))}
    for name, g in zip(model.block_names, model.gradient(blocks, X)):
        grads[name] = g
    norms = {name: frobenius_norm(g) for name, g in grads.items()}
    total = math.sqrt(sum(v ** 2 for v in norms.values()))
    return ProjectedGradient(blocks=grads, norms=norms, total=total)


def _model_for(factors):
    from .baselines import CPModel, TuckerModel
    from .solver import TripleModel
    from .tensor import CPFactors, TuckerFactors

    if isinstance(factors, TripleFactors):
        return TripleModel()
    if isinstance(factors, CPFactors):
        return CPModel()
    if isinstance(factors, TuckerFactors):
        return TuckerModel()
    raise TypeError(f"no model for factors of type {type(factors).__name__}")


def sample_mask(X, fraction, seed=0):
    """Observe ``ceil(fraction * n1*n2*n3)`` entries of ``X`` uniformly at random."""
    X = as_tensor3(X)
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    N = X.size
    # round first so that e.g. 0.5 * 1000 is not nudged up to 501 by float error
    m = min(N, max(1, math.ceil(round(fraction * N, 9))))
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(N, size=m, replace=False))
    return MaskOperator(dims=X.shape, data=vec(X)[idx], observed=idx)
