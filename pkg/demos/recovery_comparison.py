"""Compare triple, CP and Tucker models for completing a tensor.

A synthetic 12x12x12 tensor of triple rank 3 is observed on half of its
entries. Each model is fitted with the same rank, step size, proximal
weight and restarts, and the printed errors are measured against the full
ground truth. At rank one all three models describe the same set of
tensors, so their errors agree.

Run with ``python demos/recovery_comparison.py [n_seeds]``.
"""

import sys

import numpy as np

from tridecomp import (
    SolverConfig,
    cp_mals_recover,
    mals_recover,
    random_triple,
    relative_error,
    sample_mask,
    tucker_mals_recover,
)

METHODS = {"triple": mals_recover, "cp": cp_mals_recover, "tucker": tucker_mals_recover}


def run(seed, rank, fraction=0.5, dims=(12, 12, 12)):
    truth = random_triple(dims, 3, seed=seed).full()
    mask = sample_mask(truth, fraction, seed=seed)
    cfg = SolverConfig(rank=rank, seed=seed)
    return {name: relative_error(solve(mask, cfg).X, truth) for name, solve in METHODS.items()}


if __name__ == "__main__":
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    for rank in (1, 3):
        rows = [run(seed, rank) for seed in range(n_seeds)]
        print(f"rank {rank}")
        for name in METHODS:
            errs = np.array([row[name] for row in rows])
            print(f"  {name:7s} median {np.median(errs):.3e}   worst {errs.max():.3e}")
