"""Relative error against rank, and what it says about the triple rank.

The curve is computed with warm starts, so each rank begins at the padded
solution of the previous one and the error can only go down. The first
rank whose error is below a tolerance is an upper bound on the numerical
triple rank. By default we sweep a noisy triple-rank-3 tensor. Pass a
tensor file to sweep your own data instead, for example a traffic matrix
saved with ``tridecomp.io.save_tns3`` (see ``external_datasets.py``).

Run with ``python demos/rank_sweep_curve.py [tensor-file] [max-rank]``.
"""

import sys

import numpy as np

from tridecomp import SolverConfig, random_triple, rank_sweep, triple_rank_upper_bound
from tridecomp.io import load_tensor

if len(sys.argv) > 1:
    X = load_tensor(sys.argv[1])
    label = sys.argv[1]
else:
    X = random_triple((10, 10, 10), 3, seed=0).full()
    X += 1e-4 * np.linalg.norm(X) / np.sqrt(X.size) * np.random.default_rng(0).standard_normal(X.shape)
    label = "synthetic 10x10x10, triple rank 3 plus small noise"
max_rank = int(sys.argv[2]) if len(sys.argv) > 2 else 5

print(label, X.shape)
print(" r   relative error   iterations")
for point in rank_sweep(X, range(1, max_rank + 1), SolverConfig(rank=1, restarts=2), lazy=True):
    print(f"{point.rank:2d}   {point.relative_error:.4e}     {point.iterations}")

bound = triple_rank_upper_bound(X, 1e-3, SolverConfig(rank=1, restarts=2))
print(f"smallest rank with relative error <= 1e-3: {bound.rank}")
