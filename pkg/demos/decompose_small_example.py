"""Walk through the small 4x4x4 example tensor.

The tensor is the triple product of rank-two factors of shapes 4x2x2,
2x4x2 and 2x2x4 with only a few unit entries. We check the rank bounds, fit it at rank one and rank two,
and compare the result with CP and Tucker models of the same size.

Run with ``python demos/decompose_small_example.py``.
"""

import numpy as np

from tridecomp import (
    SolverConfig,
    cp_mals_decompose,
    example_factors,
    mals_decompose,
    mid_dim,
    triple_product,
    tucker_mals_decompose,
    tucker_rank,
)

X = triple_product(example_factors())
print("example tensor, frontal slices:")
for t in range(X.shape[2]):
    print(X[:, :, t])

print("\nTucker ranks of the unfoldings:", tucker_rank(X))
print("middle dimension, an upper bound on the triple rank:", mid_dim(X.shape))

for r in (1, 2):
    factors, trace = mals_decompose(X, SolverConfig(rank=r))
    print(f"\ntriple rank {r}: relative error {trace.relative_error:.3e} "
          f"after {trace.iterations} iterations (best of {SolverConfig(rank=r).restarts} starts)")
    if r == 2:
        print("reconstruction matches:", np.allclose(triple_product(factors), X, atol=1e-6))

# At r = 2 the triple model stores 3 * 4 * 2 * 2 = 48 numbers. CP needs rank
# 4 for the same budget, while Tucker with a 2x2x2 core stores 32.
for name, solve, r in (("CP", cp_mals_decompose, 4), ("Tucker", tucker_mals_decompose, 2)):
    _, trace = solve(X, SolverConfig(rank=r))
    print(f"{name} rank {r}: relative error {trace.relative_error:.3e}")
