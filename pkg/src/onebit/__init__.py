"""Dithered 1-bit quantization and the estimators built on it.

Data are reduced to signs of dithered (and, for heavy tails, truncated)
values; rescaled products of such bits are unbiased for means and second
moments, which powers four estimation pipelines: sparse covariance
estimation, sparse regression with quantized covariates, 1-bit compressed
sensing, and 1-bit low-rank matrix completion. A benchmark harness
reproduces the error-rate curves at desk scale.
"""

from .admm import SolveDiagnostics, SolverConfig, admm_lasso, admm_mc
from .completion import (
    CompletionResult,
    McObservation,
    McParams,
    McSelected,
    aggregate_observations,
    estimate_completion,
    quantize_mc_responses,
    run_completion,
    select_mc_params,
)
from .covariance import (
    CovParams,
    CovarianceEstimate,
    HEAVYTAILED,
    SUBGAUSSIAN,
    cov_from_bits,
    estimate_covariance,
    select_cov_params_heavy,
    select_cov_params_subg,
    threshold_cov,
)
from .datagen import (
    ScenarioSpec,
    make_lowrank,
    make_sparse_cov,
    make_sparse_signal,
    sample_gaussian,
    sample_iid_t,
    sample_mvt,
    sample_noise,
    spikiness,
)
from .exceptions import ConfigError, ConvergenceError
from .linalg import (
    MatrixNorms,
    clamp_max_norm,
    hard_threshold,
    norms,
    positive_part,
    soft_threshold,
    svd_soft_threshold,
)
from .quantize import (
    BitPairSample,
    QuantConfig,
    dither_sign,
    quantize_covariate_pair,
    quantize_response,
    truncate,
)
from .regression import (
    RegressionParams,
    RegressionProblem,
    RegressionResult,
    SelectedRegressionParams,
    cross_cov_bits,
    cross_cov_mixed,
    fit_sparse,
    quantize_regression,
    run_regression,
    sample_cov,
    select_regression_params,
)
from .rng import derive_seed, stream

__version__ = "0.1.0"
