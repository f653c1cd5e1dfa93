"""Streaming low-rank matrix completion with adaptive column sampling.

Three single-pass algorithms over a column stream: a noise-tolerant subspace
tracker, an exact variant that also flags corrupted columns, and a
sparsity-bounded extension for unions of low-dimensional subspaces. Seeded
generators and an experiment harness reproduce the synthetic studies.
"""

from .datagen import (
    Instance,
    MatrixFormatError,
    NoiseSpec,
    apply_noise,
    gen_cumulative,
    gen_gaussian_lowrank,
    gen_lower_bound,
    gen_mixture,
    load_matrix,
    save_matrix,
)
from .exact import (
    BasisDictionary,
    CombinatorialBudgetError,
    ExactConfig,
    RecoveryResult,
    exact_test,
    run_exact,
    sparse_represent,
)
from .harness import RunConfig, SweepGrid, mix_seed
from .linalg import (
    RankDeficientError,
    extend_basis,
    incoherence,
    numerical_rank,
    orthonormalize,
    principal_angle,
    project_residual,
    sample_indices,
    subsampled_complete,
)
from .report import RunReport, frobenius_error
from .tracker import Completion, StreamResult, TrackerConfig, run_stream

__version__ = "0.1.0"

__all__ = [
    "BasisDictionary",
    "CombinatorialBudgetError",
    "Completion",
    "ExactConfig",
    "Instance",
    "MatrixFormatError",
    "NoiseSpec",
    "RankDeficientError",
    "RecoveryResult",
    "RunConfig",
    "RunReport",
    "StreamResult",
    "SweepGrid",
    "TrackerConfig",
    "apply_noise",
    "exact_test",
    "extend_basis",
    "frobenius_error",
    "gen_cumulative",
    "gen_gaussian_lowrank",
    "gen_lower_bound",
    "gen_mixture",
    "incoherence",
    "load_matrix",
    "mix_seed",
    "numerical_rank",
    "orthonormalize",
    "principal_angle",
    "project_residual",
    "run_exact",
    "run_stream",
    "sample_indices",
    "save_matrix",
    "sparse_represent",
    "subsampled_complete",
]
