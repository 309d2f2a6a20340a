"""Triple decomposition of third-order tensors, with MALS solvers for
decomposition and low-rank recovery plus CP and Tucker baselines."""

from ._mals import SolverConfig, SolveTrace
from .baselines import (
    CPModel,
    TuckerModel,
    cp_mals_decompose,
    cp_mals_recover,
    tucker_mals_decompose,
    tucker_mals_recover,
)
from .datasets import example_factors, example_tensor, random_cp, random_triple, random_tucker
from .rank import (
    RankBound,
    constructive_triple,
    cp_to_triple,
    mid_dim,
    pad_triple,
    permute_triple,
    triple_rank_upper_bound,
    tucker_rank,
)
from .recovery import (
    MaskOperator,
    RecoveryState,
    SingularMaskError,
    initial_surrogate,
    mals_recover,
    project_feasible_update,
    projected_gradient,
    sample_mask,
)
from .solver import SweepPoint, TripleModel, mals_decompose, rank_sweep, triple_gradient, update_block
from .tensor import (
    CPFactors,
    TripleFactors,
    TuckerFactors,
    build_contraction,
    cp_tensor,
    fold,
    frobenius_norm,
    khatri_rao,
    mode_product,
    relative_error,
    triple_product,
    tucker_apply,
    unfold,
    unvec,
    vec,
)

__version__ = "0.1.0"
