"""Sparse covariance estimation from 1-bit data.

Pipeline: quantize each sample to a pair of dithered sign vectors, average
the rescaled cross products into a symmetric raw estimate, hard-threshold it
entrywise to enforce column sparsity, and optionally clip negative
eigenvalues for a PSD repair. Two regimes:

* sub-Gaussian: dither only, with scale growing like
  sigma * sqrt(log(n / (2 delta log d)));
* heavy-tailed (bounded fourth moment): truncate at eta before dithering,
  with eta and gamma both growing like (n / (delta log d))^(1/8).

The rescaling by gamma^2 is only unbiased for the gamma actually used at
quantization time, so the bit container records it and estimators refuse a
mismatched override.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .exceptions import ConfigError
from .linalg import hard_threshold, positive_part
from .quantize import BitPairSample, QuantConfig, quantize_covariate_pair
from .rng import CH_DITHER_X1, CH_DITHER_X2, stream

logger = logging.getLogger(__name__)

SUBGAUSSIAN = "subgaussian"
HEAVYTAILED = "heavytailed"


@dataclass
class CovParams:
    """Regime tag, confidence level, moment proxies, and tuning constants.

    ``sigma`` is the per-coordinate sub-Gaussian scale proxy (supplied as
    ground truth in synthetic runs; real-data use needs an estimate).
    ``fourth_moment`` bounds E|X_i|^4 in the heavy-tailed regime. The c*
    constants are the scheme's free multipliers; theory only asks that they
    are "large enough", so they are tuned per experiment and recorded in all
    outputs.
    """

    regime: str = SUBGAUSSIAN
    delta: float = 4.0
    sigma: float = 1.0
    fourth_moment: float = 1.0
    c1: float = 1.0
    c2: float = 0.6
    c3: float = 1.0
    c4: float = 1.5
    c5: float = 0.5

    def __post_init__(self):
        if self.regime not in (SUBGAUSSIAN, HEAVYTAILED):
            raise ConfigError(f"unknown regime {self.regime!r}")
        if self.delta < 1:
            raise ConfigError(f"confidence parameter delta must be >= 1, got {self.delta}")
        if not (self.sigma > 0 and self.fourth_moment > 0):
            raise ConfigError("scale proxies sigma and fourth_moment must be positive")
        for name in ("c1", "c2", "c3", "c4", "c5"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"constant {name} must be positive")
        if self.regime == HEAVYTAILED and self.c4 <= self.c3:
            raise ConfigError(
                f"heavy-tailed regime needs c4 > c3 (gamma > eta), got c3={self.c3}, c4={self.c4}"
            )


def select_cov_params_subg(n: int, d: int, p: CovParams) -> tuple[float, float]:
    """Dither scale and hard threshold for the sub-Gaussian regime.

    gamma = c1 * sigma * sqrt(log(n / (2 delta log d)))
    zeta  = c2 * sigma^2 * log(n) * sqrt(delta log d / n)

    Requires n > 2 delta log d; warns (but proceeds) if the resulting gamma
    does not exceed sigma, since that hypothesis concerns the unknowable
    true scale.
    """
    floor = 2.0 * p.delta * math.log(d)
    if n <= floor:
        raise ConfigError(
            f"sub-Gaussian selection needs n > 2 delta log d = {floor:.1f}, got n={n}"
        )
    gamma = p.c1 * p.sigma * math.sqrt(math.log(n / floor))
    if gamma <= p.sigma:
        logger.warning(
            "selected dither scale gamma=%.4g does not exceed sigma=%.4g; "
            "unbiasedness degrades for data beyond the dither range", gamma, p.sigma,
        )
    zeta = p.c2 * p.sigma**2 * math.log(n) * math.sqrt(p.delta * math.log(d) / n)
    return gamma, zeta


def select_cov_params_heavy(n: int, d: int, p: CovParams) -> tuple[float, float, float]:
    """Truncation level, dither scale, and hard threshold for heavy tails.

    eta   = c3 * M^(1/4) * (n / (delta log d))^(1/8)
    gamma = c4 * M^(1/4) * (n / (delta log d))^(1/8)
    zeta  = c5 * sqrt(M) * (delta log d / n)^(1/4)

    c4 > c3 is required so that gamma > eta and the dither can flip any
    truncated value.
    """
    if p.c4 <= p.c3:
        raise ConfigError(
            f"need c4 > c3 so the dither range dominates truncation, got c3={p.c3}, c4={p.c4}"
        )
    ratio = p.delta * math.log(d) / n
    base = p.fourth_moment**0.25 * ratio**-0.125
    eta = p.c3 * base
    gamma = p.c4 * base
    zeta = p.c5 * math.sqrt(p.fourth_moment) * ratio**0.25
    return eta, gamma, zeta


def _stack_pairs(samples: Union[BitPairSample, Iterable[BitPairSample]]) -> BitPairSample:
    if isinstance(samples, BitPairSample):
        return samples
    items = list(samples)
    if not items:
        raise ConfigError("empty sample sequence")
    dims = {s.dim for s in items}
    if len(dims) != 1:
        raise ConfigError(f"samples have mismatched dimensions: {sorted(dims)}")
    gammas = {s.gamma for s in items}
    if len(gammas) != 1:
        raise ConfigError(f"samples quantized with different gammas: {sorted(gammas)}")
    return BitPairSample(
        bits1=np.vstack([np.atleast_2d(s.bits1) for s in items]),
        bits2=np.vstack([np.atleast_2d(s.bits2) for s in items]),
        gamma=items[0].gamma,
    )


def cov_from_bits(samples: Union[BitPairSample, Iterable[BitPairSample]],
                  gamma: float) -> np.ndarray:
    """Symmetrized rescaled average of bit cross products.

    (gamma^2 / 2n) * sum_k (b1_k b2_k^T + b2_k b1_k^T), exactly symmetric by
    construction, entries in [-gamma^2, gamma^2]. ``gamma`` must equal the
    scale used at quantization time (checked against the sample record).
    """
    pairs = _stack_pairs(samples)
    if pairs.bits1.size == 0:
        raise ConfigError("empty sample sequence")
    if not math.isclose(gamma, pairs.gamma, rel_tol=1e-12):
        raise ConfigError(
            f"gamma mismatch: estimator got {gamma} but bits were quantized with "
            f"{pairs.gamma}; the rescaling is only unbiased for the true dither scale"
        )
    b1 = np.atleast_2d(pairs.bits1)
    b2 = np.atleast_2d(pairs.bits2)
    n = b1.shape[0]
    cross = b1.T @ b2
    return (gamma**2 / (2.0 * n)) * (cross + cross.T)


def threshold_cov(raw: np.ndarray, zeta: float) -> np.ndarray:
    """Entrywise hard threshold of the raw estimate (the sparsity step)."""
    return hard_threshold(raw, zeta)


@dataclass
class CovarianceEstimate:
    """Raw, sparse (thresholded), and PSD-repaired estimates plus parameters."""

    cov_raw: np.ndarray
    cov_sparse: np.ndarray
    cov_psd: np.ndarray
    params: dict = field(default_factory=dict)


def estimate_covariance(x: np.ndarray, p: CovParams, seed: int, *,
                        no_truncation: bool = False,
                        gamma: Optional[float] = None,
                        zeta: Optional[float] = None,
                        eta: Optional[float] = None) -> CovarianceEstimate:
    """End-to-end pipeline: select parameters, quantize, estimate, repair.

    ``x`` is the raw (n, d) sample matrix. Parameters are selected by the
    regime formulas unless overridden. ``no_truncation`` is the ablation
    switch for the heavy-tailed regime: keep the selected gamma but skip the
    truncation step.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.size == 0:
        raise ConfigError(f"expected a nonempty (n, d) sample matrix, got shape {x.shape}")
    n, d = x.shape

    if p.regime == SUBGAUSSIAN:
        sel_gamma, sel_zeta = select_cov_params_subg(n, d, p)
        sel_eta = None
    else:
        sel_eta, sel_gamma, sel_zeta = select_cov_params_heavy(n, d, p)
    gamma = sel_gamma if gamma is None else gamma
    zeta = sel_zeta if zeta is None else zeta
    eta = sel_eta if eta is None else eta
    if p.regime == SUBGAUSSIAN and eta is not None:
        logger.warning(
            "truncation threshold eta=%.4g supplied in the sub-Gaussian regime; "
            "proceeding, but the selection formulas assume no truncation", eta,
        )
    if no_truncation:
        eta = None

    cfg = QuantConfig(gamma=gamma, eta=eta, seed=seed)
    bits = quantize_covariate_pair(
        x, cfg, stream(seed, CH_DITHER_X1), stream(seed, CH_DITHER_X2)
    )
    raw = cov_from_bits(bits, gamma)
    sparse = threshold_cov(raw, zeta)
    psd = positive_part(sparse)
    params = {
        "regime": p.regime, "n": n, "d": d, "delta": p.delta,
        "sigma": p.sigma, "fourth_moment": p.fourth_moment,
        "c1": p.c1, "c2": p.c2, "c3": p.c3, "c4": p.c4, "c5": p.c5,
        "gamma": gamma, "zeta": zeta, "eta": eta,
        "no_truncation": bool(no_truncation),
    }
    return CovarianceEstimate(cov_raw=raw, cov_sparse=sparse, cov_psd=psd, params=params)
