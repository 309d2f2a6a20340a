import numpy as np
import pytest

from tridecomp import (
    SolverConfig,
    TuckerFactors,
    TuckerModel,
    cp_mals_decompose,
    cp_mals_recover,
    mals_decompose,
    mals_recover,
    random_cp,
    random_triple,
    random_tucker,
    relative_error,
    sample_mask,
    tucker_mals_decompose,
    tucker_mals_recover,
)
from tridecomp.baselines import CPModel

from oracles import central_difference


def _rank_one(seed=0, dims=(4, 5, 6)):
    rng = np.random.default_rng(seed)
    return np.einsum("i,j,t->ijt", *(rng.standard_normal(n) for n in dims))


def test_cp_rank_one():
    factors, trace = cp_mals_decompose(_rank_one(), SolverConfig(rank=1))
    assert trace.relative_error <= 1e-8
    assert factors.rank == 1


def test_cp_rank_three():
    X = random_cp((8, 9, 10), 3, seed=1).full()
    factors, trace = cp_mals_decompose(X, SolverConfig(rank=3))
    assert trace.relative_error <= 1e-4
    assert trace.monotone() and trace.sufficient_decrease_holds()


def test_tucker_rank_two():
    X = random_tucker((6, 7, 8), 2, seed=2).full()
    factors, trace = tucker_mals_decompose(X, SolverConfig(rank=2))
    assert isinstance(factors, TuckerFactors) and factors.core.shape == (2, 2, 2)
    assert trace.relative_error <= 1e-4
    assert trace.monotone() and trace.sufficient_decrease_holds()


def test_rank_one_models_agree():
    X = _rank_one(3)
    cfg = SolverConfig(rank=1)
    errs = [f(X, cfg)[1].relative_error for f in (mals_decompose, cp_mals_decompose, tucker_mals_decompose)]
    assert max(errs) - min(errs) <= 1e-6


def test_tucker_core_update_exact_for_identity_factors():
    X = np.random.default_rng(4).standard_normal((3, 3, 3))
    I = np.eye(3)
    model = TuckerModel()
    blocks = [I, I, I, np.zeros((3, 3, 3))]
    # the proximal pull is negligible at this lambda
    D = model.update(3, blocks, X, 1e-14)
    assert np.allclose(D, X, atol=1e-12)


@pytest.mark.parametrize("model", [CPModel(), TuckerModel()], ids=["cp", "tucker"])
def test_baseline_gradients_match_finite_differences(model):
    rng = np.random.default_rng(5)
    dims = (3, 4, 2)
    X = rng.standard_normal(dims)
    blocks = [rng.standard_normal(s) for s in model.block_shapes(dims, 2)]
    grads = model.gradient(blocks, X)
    for idx, g in enumerate(grads):

        def f(Y):
            b = list(blocks)
            b[idx] = Y
            return float(np.sum((model.full(b) - X) ** 2))

        fd = central_difference(f, blocks[idx])
        assert np.linalg.norm(g - fd) <= 1e-6 * np.linalg.norm(fd)


@pytest.mark.parametrize(
    "decompose,recover",
    [(cp_mals_decompose, cp_mals_recover), (tucker_mals_decompose, tucker_mals_recover)],
    ids=["cp", "tucker"],
)
def test_full_observation_recovery_matches_decompose(decompose, recover):
    X = _rank_one(6, (3, 4, 5)) + 0.1 * random_cp((3, 4, 5), 1, seed=7).full()
    cfg = SolverConfig(rank=2, restarts=2)
    state = recover(sample_mask(X, 1.0), cfg)
    _, tr = decompose(X, cfg)
    assert abs(relative_error(state.factors.full(), X) - tr.relative_error) <= 1e-6


@pytest.mark.parametrize("recover", [cp_mals_recover, tucker_mals_recover], ids=["cp", "tucker"])
def test_baseline_recovery_invariants(recover):
    X = random_triple((6, 6, 6), 2, seed=8).full()
    mask = sample_mask(X, 0.5, seed=8)
    tr = recover(mask, SolverConfig(rank=2, restarts=2, max_iter=400)).trace
    assert max(tr.feasibility) <= 1e-10 * (1 + np.linalg.norm(mask.data))
    assert tr.monotone() and tr.sufficient_decrease_holds()


def test_rank_one_recoveries_agree():
    X = _rank_one(9, (6, 6, 6))
    mask = sample_mask(X, 0.5, seed=9)
    cfg = SolverConfig(rank=1)
    errs = [relative_error(f(mask, cfg).X, X) for f in (mals_recover, cp_mals_recover, tucker_mals_recover)]
    assert max(errs) - min(errs) <= 1e-6
