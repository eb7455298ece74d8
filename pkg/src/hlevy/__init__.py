"""Eigenvalue dynamics of Hermitian matrix Levy processes: simulation and verification."""

__version__ = "0.1.0"

from .linalg import (
    SpectralDecomposition,
    commutator_norm,
    devectorize,
    eig_hermitian,
    frobenius_norm,
    hermitian_matrix,
    numerical_rank,
    trace_inner,
    vectorize,
)
from .model import (
    CovarianceOperator,
    LevyTriplet,
    compensator_drift,
    condition_d_check,
    covariance_matrix,
    gaussian_increment,
    model_validity_flags,
    sample_jumps,
)
from .paths import SimulationConfig, pre_jump_state, simulate_dyson_entrywise, simulate_path
from .tracking import align_frames, eigen_path
from .jumps import (
    check_disjoint_spectra,
    check_hoffman_wielandt,
    check_simultaneity,
    classify_jump,
    secular_rank_one_eigs,
)
from .hadamard import (
    drift_term,
    eigenvalue_gradient,
    eigenvalue_second_partials,
    fd_check,
)
from .verify import dyson_drift_estimate, martingale_bv_split, reconstruct
