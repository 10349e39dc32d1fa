"""Sparse linear regression from quantized data.

Three modes share one convex program
    minimize  0.5 * theta^T Q theta - b^T theta + lam * ||theta||_1
and differ in how (Q, b) are built from the data:

* ``qccs``  -- both covariates and responses are 1-bit. Q is the
  hard-thresholded covariance estimate from the covariate bit pairs, b is
  the rescaled bit cross-covariance. Q can lose PSD-ness at finite n; it is
  then repaired by eigenvalue clipping and the repair is recorded.
* ``cs_subg`` -- full covariates, 1-bit responses. Q is the sample
  covariance, b the half-quantized cross-covariance.
* ``cs_heavy`` -- like cs_subg but covariates are elementwise truncated at
  eta_x and responses truncated at eta_y before dithering.

Truncation/dither scales are per channel (gamma_x != gamma_y is fine); the
rescalings in b use exactly the scales used at quantization time.

The working guarantees assume the target's norm is bounded by a modest
constant (l2 for the sub-Gaussian modes, l1 for cs_heavy). That is a
property of the unknown signal, so it is documented here rather than
enforced at runtime.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .admm import SolveDiagnostics, SolverConfig, admm_lasso
from .covariance import (
    CovParams,
    HEAVYTAILED,
    SUBGAUSSIAN,
    cov_from_bits,
    select_cov_params_heavy,
    select_cov_params_subg,
    threshold_cov,
)
from .exceptions import ConfigError
from .linalg import min_eigenvalue, positive_part
from .quantize import BitPairSample, QuantConfig, quantize_covariate_pair, quantize_response, truncate
from .rng import CH_DITHER_X1, CH_DITHER_X2, CH_DITHER_Y, stream

logger = logging.getLogger(__name__)

QCCS = "qccs"
CS_SUBG = "cs_subg"
CS_HEAVY = "cs_heavy"
MODES = (QCCS, CS_SUBG, CS_HEAVY)


@dataclass
class RegressionParams:
    """Confidence level, channel scale proxies, and tuning constants.

    ``sigma1``/``sigma2`` are the covariate/response sub-Gaussian proxies,
    ``fourth_moment`` the shared heavy-tailed moment bound. ``cov`` holds the
    covariate-channel constants used when qccs builds its covariance
    estimate; it is filled in automatically when left None.
    """

    delta: float = 4.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    fourth_moment: float = 1.0
    c6: float = 1.0
    c7: float = 1.0
    c8: float = 1.0
    c8prime: float = 1.0
    c9: float = 1.0
    c10: float = 1.0
    c11: float = 2.0
    c12: float = 1.0
    cov: Optional[CovParams] = None

    def cov_params(self, regime: str) -> CovParams:
        if self.cov is not None:
            return replace(self.cov, regime=regime)
        return CovParams(
            regime=regime, delta=self.delta, sigma=self.sigma1,
            fourth_moment=self.fourth_moment,
        )


@dataclass(frozen=True)
class SelectedRegressionParams:
    """Signal-processing and regularization parameters for one problem size."""

    lam: float
    gamma_x: Optional[float] = None
    gamma_y: Optional[float] = None
    eta_x: Optional[float] = None
    eta_y: Optional[float] = None
    zeta: Optional[float] = None


def select_regression_params(mode: str, regime: str, n: int, d: int,
                             p: RegressionParams) -> SelectedRegressionParams:
    """Derive all truncation/dither scales and the l1 weight for one mode.

    qccs reuses the covariance-channel formulas per channel (sigma1 for the
    covariates, sigma2 for the responses); the 1-bit CS modes use their own
    scalings:

    cs_subg : gamma_y = c8' * sqrt(log n),  lam = c8 * sqrt(delta log d log n / n)
    cs_heavy: eta_x = c9 * (n / (delta log d))^(1/4),
              eta_y = c10 * (n / (delta log d))^(1/6),
              gamma_y = c11 * (n / (delta log d))^(1/6)   (c11 > c10),
              lam = c12 * (delta log d / n)^(1/3)
    """
    if mode not in MODES:
        raise ConfigError(f"unknown regression mode {mode!r}")
    logd = math.log(d)
    if mode == QCCS:
        covp = p.cov_params(regime)
        if regime == SUBGAUSSIAN:
            gamma_x, zeta = select_cov_params_subg(n, d, covp)
            gamma_y, _ = select_cov_params_subg(n, d, replace(covp, sigma=p.sigma2))
            lam = p.c6 * math.log(n) * math.sqrt(p.delta * logd / n)
            return SelectedRegressionParams(lam=lam, gamma_x=gamma_x, gamma_y=gamma_y, zeta=zeta)
        if regime == HEAVYTAILED:
            eta_x, gamma_x, zeta = select_cov_params_heavy(n, d, covp)
            lam = p.c7 * math.sqrt(p.fourth_moment) * (p.delta * logd / n) ** 0.25
            return SelectedRegressionParams(
                lam=lam, gamma_x=gamma_x, gamma_y=gamma_x, eta_x=eta_x, eta_y=eta_x, zeta=zeta,
            )
        raise ConfigError(f"unknown regime {regime!r}")
    if mode == CS_SUBG:
        gamma_y = p.c8prime * math.sqrt(math.log(n))
        lam = p.c8 * math.sqrt(p.delta * logd * math.log(n) / n)
        return SelectedRegressionParams(lam=lam, gamma_y=gamma_y)
    # cs_heavy
    if p.c11 <= p.c10:
        raise ConfigError(
            f"cs_heavy needs c11 > c10 (gamma > eta_y), got c10={p.c10}, c11={p.c11}"
        )
    ratio = n / (p.delta * logd)
    eta_x = p.c9 * ratio**0.25
    eta_y = p.c10 * ratio ** (1.0 / 6.0)
    gamma_y = p.c11 * ratio ** (1.0 / 6.0)
    lam = p.c12 * ratio ** (-1.0 / 3.0)
    return SelectedRegressionParams(lam=lam, gamma_y=gamma_y, eta_x=eta_x, eta_y=eta_y)


@dataclass
class RegressionProblem:
    """Quantized data for one recovery problem.

    Exactly one of ``x`` (full or truncated covariates) and ``x_bits``
    (covariate bit pairs) is set, matching the mode. ``y_bits`` entries are
    exactly +-1. ``known_cov`` optionally supplies the population covariance
    as the quadratic term (oracle mode).
    """

    mode: str
    y_bits: np.ndarray
    x: Optional[np.ndarray] = None
    x_bits: Optional[BitPairSample] = None
    gamma_x: Optional[float] = None
    gamma_y: Optional[float] = None
    eta_x: Optional[float] = None
    eta_y: Optional[float] = None
    zeta: Optional[float] = None
    known_cov: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown regression mode {self.mode!r}")
        if self.mode == QCCS and (self.x_bits is None or self.x is not None):
            raise ConfigError("qccs problems carry quantized covariates only")
        if self.mode != QCCS and (self.x is None or self.x_bits is not None):
            raise ConfigError(f"{self.mode} problems carry full covariates only")
        y = np.asarray(self.y_bits, dtype=float)
        if not np.all(np.abs(y) == 1.0):
            raise ConfigError("response bits must be exactly +-1")
        self.y_bits = y


def quantize_regression(x: np.ndarray, y: np.ndarray, mode: str, regime: str,
                        sel: SelectedRegressionParams, seed: int, *,
                        no_truncation: bool = False) -> RegressionProblem:
    """Apply the mode's signal processing to raw (x, y) and pack a problem.

    ``no_truncation`` is the heavy-tailed ablation: keep the selected dither
    scales but skip every truncation step.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ConfigError(f"shape mismatch: x {x.shape} vs y {y.shape}")

    eta_x = None if no_truncation else sel.eta_x
    eta_y = None if no_truncation else sel.eta_y
    rng_y = stream(seed, CH_DITHER_Y)

    if mode == QCCS:
        cfg_x = QuantConfig(gamma=sel.gamma_x, eta=eta_x, seed=seed)
        bits = quantize_covariate_pair(
            x, cfg_x, stream(seed, CH_DITHER_X1), stream(seed, CH_DITHER_X2)
        )
        cfg_y = QuantConfig(gamma=sel.gamma_y, eta=eta_y, seed=seed)
        y_bits = quantize_response(y, cfg_y, rng_y)
        return RegressionProblem(
            mode=mode, y_bits=y_bits, x_bits=bits,
            gamma_x=sel.gamma_x, gamma_y=sel.gamma_y, eta_x=eta_x, eta_y=eta_y,
            zeta=sel.zeta,
        )
    if mode == CS_HEAVY and eta_x is not None:
        x = truncate(x, eta_x)
    cfg_y = QuantConfig(gamma=sel.gamma_y, eta=eta_y, seed=seed)
    y_bits = quantize_response(y, cfg_y, rng_y)
    return RegressionProblem(
        mode=mode, y_bits=y_bits, x=x,
        gamma_y=sel.gamma_y, eta_x=eta_x, eta_y=eta_y,
    )


def cross_cov_bits(y_bits: np.ndarray, x_bits: BitPairSample,
                   gamma_x: float, gamma_y: float) -> np.ndarray:
    """Cross-covariance from fully quantized data.

    (gamma_x * gamma_y / n) * sum_k y_k * b1_k, using the first bit vector of
    each covariate pair. The per-channel scales must match quantization time.
    """
    y = np.asarray(y_bits, dtype=float)
    b1 = np.atleast_2d(x_bits.bits1)
    if y.shape[0] != b1.shape[0]:
        raise ConfigError(f"length mismatch: {y.shape[0]} responses vs {b1.shape[0]} covariates")
    if not math.isclose(gamma_x, x_bits.gamma, rel_tol=1e-12):
        raise ConfigError(
            f"gamma_x mismatch: got {gamma_x}, bits quantized with {x_bits.gamma}"
        )
    n = y.shape[0]
    return (gamma_x * gamma_y / n) * (b1.T @ y)


def cross_cov_mixed(y_bits: np.ndarray, x: np.ndarray, gamma_y: float) -> np.ndarray:
    """Cross-covariance from 1-bit responses and full (possibly truncated) covariates."""
    y = np.asarray(y_bits, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape[0] != x.shape[0]:
        raise ConfigError(f"length mismatch: {y.shape[0]} responses vs {x.shape[0]} covariates")
    n = y.shape[0]
    return (gamma_y / n) * (x.T @ y)


def sample_cov(x: np.ndarray) -> np.ndarray:
    """Sample second-moment matrix (1/n) X^T X; PSD by construction."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ConfigError(f"expected a nonempty (n, d) matrix, got shape {x.shape}")
    return (x.T @ x) / x.shape[0]


def fit_sparse(q: np.ndarray, b: np.ndarray, lam: float,
               solver: SolverConfig | None = None) -> np.ndarray:
    """Solve the l1-regularized quadratic program; returns the estimate."""
    theta, _ = admm_lasso(q, b, lam, solver)
    return theta


def lasso_kkt_gap(q: np.ndarray, b: np.ndarray, lam: float, theta: np.ndarray,
                  zero_tol: float = 1e-9) -> float:
    """Worst-coordinate violation of the first-order optimality condition.

    At a minimizer, g = Q theta - b satisfies g_i = -lam * sign(theta_i) on
    the support and |g_i| <= lam off it. Returns the largest excess.
    """
    g = np.asarray(q) @ theta - np.asarray(b)
    on = np.abs(theta) > zero_tol
    gap_on = np.abs(g[on] + lam * np.sign(theta[on])).max(initial=0.0)
    gap_off = np.maximum(np.abs(g[~on]) - lam, 0.0).max(initial=0.0)
    return float(max(gap_on, gap_off))


@dataclass
class RegressionResult:
    theta: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    solve: SolveDiagnostics | None = None


def run_regression(problem: RegressionProblem, lam: float,
                   solver: SolverConfig | None = None) -> RegressionResult:
    """Build (Q, b) for the problem's mode and solve the convex program."""
    diagnostics: dict = {"mode": problem.mode, "lam": lam, "psd_repaired": False}
    if problem.mode == QCCS:
        if problem.zeta is None:
            raise ConfigError("qccs problems need the hard threshold zeta")
        raw = cov_from_bits(problem.x_bits, problem.gamma_x)
        q = threshold_cov(raw, problem.zeta)
        lam_min = min_eigenvalue(q)
        diagnostics["q_min_eigenvalue"] = lam_min
        if lam_min < 0:
            # The convex program needs PSD Q; clip the negative part and say so.
            q = positive_part(q)
            diagnostics["psd_repaired"] = True
            logger.info("qccs quadratic term repaired: min eigenvalue was %.3e", lam_min)
        b = cross_cov_bits(problem.y_bits, problem.x_bits, problem.gamma_x, problem.gamma_y)
    else:
        q = sample_cov(problem.x)
        b = cross_cov_mixed(problem.y_bits, problem.x, problem.gamma_y)
    if problem.known_cov is not None:
        q = np.asarray(problem.known_cov, dtype=float)
        diagnostics["q_oracle"] = True
    theta, solve = admm_lasso(q, b, lam, solver)
    diagnostics["kkt_gap"] = lasso_kkt_gap(q, b, lam, theta)
    return RegressionResult(theta=theta, diagnostics=diagnostics, solve=solve)
