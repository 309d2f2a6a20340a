import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_cp, naive_triple_product, naive_tucker, naive_unfold, naive_vec
from tridecomp import (
    CPFactors,
    TripleFactors,
    TuckerFactors,
    build_contraction,
    cp_tensor,
    example_factors,
    example_tensor,
    fold,
    frobenius_norm,
    relative_error,
    triple_product,
    tucker_apply,
    unfold,
    unvec,
    vec,
)

dims_st = st.tuples(*[st.integers(1, 6)] * 3)


def _counting_tensor():
    # x_ijt = i + 2(j-1) + 4(t-1), 1-based
    X = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for t in range(2):
                X[i, j, t] = (i + 1) + 2 * j + 4 * t
    return X


def test_mode1_unfolding_by_hand():
    assert np.array_equal(unfold(_counting_tensor(), 1), [[1, 3, 5, 7], [2, 4, 6, 8]])


def test_mode3_unfolding_by_hand():
    assert np.array_equal(unfold(_counting_tensor(), 3), [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_vec_of_counting_tensor_is_sorted():
    assert np.array_equal(vec(_counting_tensor()), np.arange(1, 9))


def test_degenerate_mode1_unfolding_is_a_column():
    x = np.array([3.0, -1.0, 2.5])
    assert np.array_equal(unfold(x.reshape(3, 1, 1), 1), x[:, None])


@pytest.mark.parametrize("mode", [0, 4, "1"])
def test_invalid_mode_rejected(mode):
    with pytest.raises(ValueError):
        unfold(np.zeros((2, 2, 2)), mode)


def test_unvec_rejects_wrong_length():
    with pytest.raises(ValueError):
        unvec(np.zeros(7), (2, 2, 2))


@settings(max_examples=60, deadline=None)
@given(dims=dims_st, seed=st.integers(0, 2**32 - 1))
def test_unfold_matches_index_formulas_and_round_trips(dims, seed):
    X = np.random.default_rng(seed).standard_normal(dims)
    assert np.array_equal(vec(X), naive_vec(X))
    assert np.array_equal(unvec(vec(X), dims), X)
    for mode in (1, 2, 3):
        M = unfold(X, mode)
        assert np.array_equal(M, naive_unfold(X, mode))
        assert np.array_equal(fold(M, mode, dims), X)
        # unfolding only rearranges entries
        assert np.sum(M ** 2) == pytest.approx(frobenius_norm(X) ** 2, rel=1e-13)


def _random_triple(rng, dims, r):
    n1, n2, n3 = dims
    return TripleFactors(
        rng.standard_normal((n1, r, r)),
        rng.standard_normal((r, n2, r)),
        rng.standard_normal((r, r, n3)),
    )


def test_triple_product_matches_six_loop_oracle_on_200_cases():
    rng = np.random.default_rng(20240101)
    for _ in range(200):
        dims = tuple(rng.integers(1, 7, size=3))
        r = int(rng.integers(1, 5))
        F = _random_triple(rng, dims, r)
        expected = naive_triple_product(F.A, F.B, F.C)
        assert np.max(np.abs(triple_product(F) - expected)) <= 1e-12 * max(1.0, np.abs(expected).max())


@settings(max_examples=60, deadline=None)
@given(dims=dims_st, r=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_contraction_identities(dims, r, seed):
    F = _random_triple(np.random.default_rng(seed), dims, r)
    X = triple_product(F)
    scale = max(1.0, np.abs(X).max())
    Fm = build_contraction("F", F.B, F.C)
    Gm = build_contraction("G", F.A, F.C)
    Hm = build_contraction("H", F.A, F.B)
    assert Fm.shape == (r * r, dims[1] * dims[2])
    assert Gm.shape == (r * r, dims[0] * dims[2])
    assert Hm.shape == (r * r, dims[0] * dims[1])
    assert np.allclose(unfold(F.A, 1) @ Fm, unfold(X, 1), rtol=0, atol=1e-12 * scale)
    assert np.allclose(unfold(F.B, 2) @ Gm, unfold(X, 2), rtol=0, atol=1e-12 * scale)
    assert np.allclose(unfold(F.C, 3) @ Hm, unfold(X, 3), rtol=0, atol=1e-12 * scale)


def test_rank_one_contraction_is_outer_row():
    b = np.array([1.0, 2.0, -1.0])
    c = np.array([0.5, 3.0])
    Fm = build_contraction("F", b.reshape(1, 3, 1), c.reshape(1, 1, 2))
    assert np.allclose(Fm, np.outer(c, b).reshape(1, -1))  # column j + t*n2


def test_contraction_matrices_random_r2():
    rng = np.random.default_rng(7)
    F = _random_triple(rng, (3, 4, 5), 2)
    X = naive_triple_product(F.A, F.B, F.C)
    assert np.allclose(unfold(F.A, 1) @ build_contraction("F", F.B, F.C), unfold(X, 1), atol=1e-12)


def test_contraction_rejects_bad_kind_and_shapes():
    F = example_factors()
    with pytest.raises(ValueError):
        build_contraction("K", F.A, F.B)
    with pytest.raises(ValueError):
        build_contraction("F", F.A, F.C)


def test_example_tensor_entries():
    X = example_tensor()
    ones = {(1, 1, 1), (1, 3, 3), (2, 2, 1), (2, 4, 3), (3, 1, 2), (3, 3, 4), (4, 2, 2), (4, 4, 4)}
    for ix in np.ndindex(4, 4, 4):
        one_based = tuple(k + 1 for k in ix)
        assert X[ix] == (1.0 if one_based in ones else 0.0)


def test_example_third_contraction_reproduces_mode3_unfolding():
    F = example_factors()
    H = build_contraction("H", F.A, F.B)
    assert np.array_equal(unfold(F.C, 3) @ H, unfold(example_tensor(), 3))


def test_rank_one_triple_is_outer_product():
    a, b, c = np.array([1.0, 2.0]), np.array([3.0, -1.0, 0.5]), np.array([2.0, 4.0])
    F = TripleFactors(a.reshape(2, 1, 1), b.reshape(1, 3, 1), c.reshape(1, 1, 2))
    assert np.allclose(triple_product(F), np.einsum("i,j,t->ijt", a, b, c))


def test_zero_factor_gives_zero_tensor():
    rng = np.random.default_rng(1)
    F = _random_triple(rng, (3, 2, 4), 2)
    Z = TripleFactors(np.zeros_like(F.A), F.B, F.C)
    assert not np.any(triple_product(Z))


def test_triple_factors_rank_mismatch():
    with pytest.raises(ValueError):
        TripleFactors(np.zeros((2, 2, 2)), np.zeros((3, 2, 3)), np.zeros((2, 2, 2)))


def test_triple_product_dims_mismatch():
    with pytest.raises(ValueError):
        triple_product(example_factors(), dims=(4, 4, 5))


def test_cp_rank_one_by_hand():
    F = CPFactors(np.array([[1.0], [2.0]]), np.array([[1.0], [0.0]]), np.array([[1.0], [1.0]]))
    X = cp_tensor(F)
    for t in range(2):
        assert np.array_equal(X[:, 0, t], [1.0, 2.0])
        assert np.array_equal(X[:, 1, t], [0.0, 0.0])


def test_cp_zero_and_oracle():
    rng = np.random.default_rng(3)
    A, B, C = (rng.standard_normal((2, 2)) for _ in range(3))
    assert np.allclose(cp_tensor(CPFactors(A, B, C)), naive_cp(A, B, C), atol=1e-14)
    assert not np.any(cp_tensor(CPFactors(np.zeros((2, 2)), B, C)))


def test_cp_shape_errors():
    with pytest.raises(ValueError):
        CPFactors(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def test_tucker_identity_cases():
    core = np.zeros((2, 2, 2))
    core[0, 0, 0] = 1.0
    I = np.eye(2)
    X = tucker_apply(TuckerFactors(core, I, I, I))
    assert X[0, 0, 0] == 1.0 and np.sum(X) == 1.0
    D = np.random.default_rng(0).standard_normal((2, 2, 2))
    assert np.array_equal(tucker_apply(TuckerFactors(D, I, I, I)), D)


def test_tucker_matches_oracle():
    rng = np.random.default_rng(4)
    D = rng.standard_normal((2, 2, 2))
    U, V, W = (rng.standard_normal((3, 2)) for _ in range(3))
    assert np.allclose(tucker_apply(TuckerFactors(D, U, V, W)), naive_tucker(D, U, V, W), atol=1e-13)


def test_tucker_shape_errors():
    with pytest.raises(ValueError):
        TuckerFactors(np.zeros((2, 2, 2)), np.zeros((3, 3)), np.zeros((3, 2)), np.zeros((3, 2)))


def test_norms_and_relative_error():
    assert frobenius_norm(np.zeros((2, 3, 4))) == 0.0
    assert frobenius_norm(np.array([3.0, 4.0]).reshape(2, 1, 1)) == 5.0
    X = np.random.default_rng(5).standard_normal((2, 3, 4))
    assert relative_error(X, X) == 0.0
    with pytest.raises(ZeroDivisionError):
        relative_error(X, np.zeros_like(X))


def test_factor_containers_are_immutable():
    F = example_factors()
    with pytest.raises(Exception):
        F.A = np.zeros((4, 2, 2))
