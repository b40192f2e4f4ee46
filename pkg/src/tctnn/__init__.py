"""Multidimensional time series forecasting via deterministic tensor completion.

The package implements a tensor-tensor product algebra over trailing-mode
DFTs, the temporal convolution transform that turns forecasting into a
completion problem with dispersed missing entries, ADMM solvers for the
nuclear-norm completion models, and diagnostics that evaluate the exact
recovery and exact prediction guarantees on concrete instances.
"""

from .metrics import MetricsReport, metrics
from .sampling import SamplingMask, bernoulli_mask, min_sampling_ratio, prediction_mask, project
from .solver import (
    AdmmConfig,
    ForecastResult,
    SolveReport,
    forecast,
    solve_tcmnn,
    solve_tctnn,
    solve_tnn,
)
from .synth import synth, synth_lowrank, synth_periodic, synth_smooth
from .temporal_conv import (
    conv_inverse,
    conv_sampling_mask,
    conv_tensor,
    default_kernel_size,
    periodicity_beta,
    periodicity_bound,
    rank_r_error,
    smoothness_bound,
    smoothness_eta,
    temporal_circular_conv,
)
from .tensor_core import (
    TensorFormatError,
    TensorSizeError,
    bcirc,
    bfold,
    bunfold,
    frobenius_norm,
    hadamard,
    load_tensor,
    save_tensor,
    zeros,
)
from .theory import (
    HorizonReport,
    IncoherenceReport,
    RecoveryCheck,
    bernoulli_success_probability,
    deterministic_recovery_check,
    incoherence_mu,
    max_exact_horizon,
)
from .tsvd import (
    TSvdFactors,
    dft_trailing,
    identity_tensor,
    idft_trailing,
    multi_rank,
    multi_rank_sum,
    spectral_norm,
    t_product,
    t_svd,
    t_svt,
    tnn,
    transpose,
    tubal_rank,
)

__version__ = "0.1.0"
