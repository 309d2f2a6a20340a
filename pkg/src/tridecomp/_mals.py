"""Shared machinery for the proximal alternating least squares solvers.

Every solver in the package (triple, CP and Tucker; decomposition and
recovery) is the same loop: cyclic exact proximal ridge updates of each
block followed by extrapolation with step ``gamma``. A model object supplies
the block updates; this module runs the loop, records the trace, handles
restarts and picks the winner.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from .tensor import frobenius_norm

ZERO_BLOCK_NORM = 1e-14
INIT_CHOICES = ("random-gaussian", "provided", "constructive")


@dataclass
class SolverConfig:
    """Hyperparameters shared by all MALS solvers.

    ``lam=None`` selects the scale-aware default
    ``1e-3 * ||X||_F^2 / (n1*n2*n3)`` (mean square of the observed data for
    recovery problems).
    """

    rank: int
    gamma: float = 1.5
    lam: Optional[float] = None
    eps: float = 1e-8
    max_iter: int = 2000
    seed: int = 0
    restarts: int = 5
    init: str = "random-gaussian"
    init_factors: object = None
    threads: int = 1

    def __post_init__(self):
        if int(self.rank) != self.rank or self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")
        if not 1.0 <= self.gamma < 2.0:
            raise ValueError(f"gamma must lie in [1, 2), got {self.gamma}")
        if self.lam is not None and not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ValueError(f"restarts must be a positive integer, got {self.restarts!r}")
        if self.init not in INIT_CHOICES:
            raise ValueError(f"init must be one of {INIT_CHOICES}, got {self.init!r}")
        if self.init == "provided" and self.init_factors is None:
            raise ValueError("init='provided' requires init_factors")
        if int(self.threads) != self.threads or self.threads < 1:
            raise ValueError(f"threads must be a positive integer, got {self.threads!r}")
        self.rank = int(self.rank)

    def resolve_lam(self, mean_square):
        if self.lam is not None:
            return float(self.lam)
        lam = 1e-3 * float(mean_square)
        # all-zero data would give lam = 0, which loses positive definiteness
        return lam if lam > 0 else 1e-3


@dataclass
class SolveTrace:
    """Per-iteration diagnostics of one MALS run.

    ``objective[k]`` is ``f`` at iterate ``k`` (so it has one more entry than
    the other per-iteration columns). ``changes[k]`` holds the relative change
    of each block between iterates ``k`` and ``k+1`` and ``step_sq[k]`` the
    squared Euclidean length of that whole step.
    """

    block_names: tuple
    gamma: float
    lam: float
    objective: list = field(default_factory=list)
    changes: list = field(default_factory=list)
    step_sq: list = field(default_factory=list)
    feasibility: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    iterations: int = 0
    reason: str = ""
    relative_error: Optional[float] = None
    gradient_norm: Optional[float] = None
    observed_residual: Optional[float] = None
    start: int = 0

    @property
    def final_objective(self):
        return self.objective[-1]

    def decrease_slack(self):
        """``f^k - f^{k+1} - (2 lam / gamma) ||y^{k+1} - y^k||^2`` per iteration."""
        f = np.asarray(self.objective)
        return f[:-1] - f[1:] - (2.0 * self.lam / self.gamma) * np.asarray(self.step_sq)

    def sufficient_decrease_holds(self, tol=1e-10):
        f = np.asarray(self.objective)
        return bool(np.all(self.decrease_slack() >= -tol * (1.0 + f[:-1])))

    def monotone(self, tol=1e-10):
        f = np.asarray(self.objective)
        return bool(np.all(f[1:] <= f[:-1] + tol * (1.0 + f[:-1])))


def prox_ridge(target, M, current, lam):
    """Exact minimizer of ``||Y M - target||^2 + lam ||Y - current||^2``.

    Solves ``(M M^T + lam I) Y^T = (target M^T + lam current)^T`` with a
    Cholesky factorization (LAPACK ``potrf``/``potrs`` called directly, since
    the systems are tiny and call overhead dominates).
    """
    G = M @ M.T
    G[np.diag_indices_from(G)] += lam
    rhs = (target @ M.T + lam * current).T
    L, info = lapack.dpotrf(G, lower=1)
    if info != 0:
        raise np.linalg.LinAlgError(f"proximal system is not positive definite (potrf info={info})")
    sol, info = lapack.dpotrs(L, rhs, lower=1)
    if info != 0:
        raise np.linalg.LinAlgError(f"proximal solve failed (potrs info={info})")
    return sol.T


def relative_change(new, old):
    denom = np.linalg.norm(new)
    diff = np.linalg.norm(new - old)
    return float(diff if denom < ZERO_BLOCK_NORM else diff / denom)


@dataclass
class RunResult:
    blocks: list
    X: np.ndarray
    model_tensor: np.ndarray
    trace: SolveTrace


def run_mals(model, X, blocks, gamma, lam, eps, max_iter, x_step=None, feasibility=None):
    """Run one MALS solve from ``blocks``.

    Without ``x_step`` the data tensor ``X`` is fixed. With ``x_step`` the
    surrogate tensor is treated as an extra leading block: each sweep first
    sets ``X <- gamma * x_step(X, model_tensor) + (1 - gamma) * X`` and then
    updates the factor blocks against the new ``X``. ``feasibility(X)``, when
    given, is logged after every X update.
    """
    names = (("X",) if x_step is not None else ()) + tuple(model.block_names)
    trace = SolveTrace(block_names=names, gamma=gamma, lam=lam)
    blocks = [np.array(b, dtype=float) for b in blocks]
    X = np.array(X, dtype=float)
    Y = model.full(blocks)
    f = float(np.sum((X - Y) ** 2))
    trace.objective.append(f)
    t0 = time.perf_counter()

    if f == 0.0:
        trace.reason = "exact"
    for _ in range(max_iter if f > 0.0 else 0):
        changes = []
        step = 0.0
        if x_step is not None:
            X_new = gamma * x_step(X, Y) + (1.0 - gamma) * X
            step += float(np.sum((X_new - X) ** 2))
            changes.append(relative_change(X_new, X))
            X = X_new
            if feasibility is not None:
                trace.feasibility.append(feasibility(X))
        for idx in range(len(blocks)):
            old = blocks[idx]
            new = gamma * model.update(idx, blocks, X, lam) + (1.0 - gamma) * old
            step += float(np.sum((new - old) ** 2))
            changes.append(relative_change(new, old))
            blocks[idx] = new
        Y = model.full(blocks)
        f = float(np.sum((X - Y) ** 2))
        trace.objective.append(f)
        trace.changes.append(tuple(changes))
        trace.step_sq.append(step)
        trace.seconds.append(time.perf_counter() - t0)
        trace.iterations += 1
        if not math.isfinite(f):
            trace.reason = "diverged"
            break
        if max(changes) <= eps:
            trace.reason = "converged"
            break
    else:
        if not trace.reason:
            trace.reason = "max_iter"

    trace.gradient_norm = float(
        math.sqrt(sum(np.sum(g ** 2) for g in model.gradient(blocks, X)))
    )
    return RunResult(blocks=blocks, X=X, model_tensor=Y, trace=trace)


def start_rng(seed, start):
    """Independent, reproducible generator for restart ``start``."""
    return np.random.default_rng([int(seed), int(start)])


def best_of(starts: Sequence, solve: Callable, threads=1):
    """Run ``solve(start_blocks)`` for every start and keep the lowest objective.

    Ties go to the earliest start, so the outcome does not depend on
    ``threads``.
    """
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, starts))
    else:
        results = [solve(s) for s in starts]
    best = 0
    for k, res in enumerate(results):
        fk = res.trace.final_objective
        fb = results[best].trace.final_objective
        if math.isfinite(fk) and (not math.isfinite(fb) or fk < fb):
            best = k
    results[best].trace.start = best
    return results[best], results


def mean_square(X):
    X = np.asarray(X)
    return frobenius_norm(X) ** 2 / X.size


def initial_starts(model, cfg, X):
    """Starting blocks requested by ``cfg.init``."""
    X = np.asarray(X)
    if cfg.init == "provided":
        blocks = [np.array(b, dtype=float) for b in model.blocks_of(cfg.init_factors)]
        expected = model.block_shapes(X.shape, cfg.rank)
        if [b.shape for b in blocks] != list(expected):
            raise ValueError(
                f"provided factors have shapes {[b.shape for b in blocks]}, "
                f"expected {list(expected)}"
            )
        return [blocks]
    if cfg.init == "constructive":
        constructive = getattr(model, "constructive", None)
        if constructive is None:
            raise ValueError(f"{type(model).__name__} has no constructive initialization")
        return [constructive(X, cfg.rank)]
    norm = frobenius_norm(X)
    return [
        model.init_blocks(start_rng(cfg.seed, k), X.shape, cfg.rank, norm)
        for k in range(cfg.restarts)
    ]


def decompose(model, X, cfg, extra_starts=()):
    """Best-of-starts MALS fit of ``model`` to the fixed tensor ``X``."""
    lam = cfg.resolve_lam(mean_square(X))
    starts = initial_starts(model, cfg, X) + [list(s) for s in extra_starts]

    def solve(blocks):
        return run_mals(model, X, blocks, cfg.gamma, lam, cfg.eps, cfg.max_iter)

    best, _ = best_of(starts, solve, cfg.threads)
    norm = frobenius_norm(X)
    resid = math.sqrt(best.trace.final_objective)
    best.trace.relative_error = resid / norm if norm > 0 else (0.0 if resid == 0 else math.inf)
    return best
