"""Three-step 1-bit quantization: truncation, uniform dithering, sign.

A channel is configured by `QuantConfig`: an optional truncation threshold
``eta`` (heavy-tailed data only), a dither half-width ``gamma``, and a seed.
Truncation clips magnitudes at ``eta``; dithering adds uniform noise on
[-gamma, gamma]; quantization takes the sign, with sign(0) = +1.

The payoff of the dither is unbiasedness: for |x| <= gamma the expectation
of gamma * sign(x + dither) is exactly x, and products of two independently
dithered signs are unbiased for the product. Covariate vectors are therefore
quantized to a *pair* of bit vectors per sample (two independent dithers),
which is what lets products of bits estimate second moments including the
diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .rng import CH_DITHER_X1, CH_DITHER_X2, CH_DITHER_Y, stream


@dataclass(frozen=True)
class QuantConfig:
    """One quantization channel: truncation threshold, dither scale, seed.

    ``eta is None`` disables truncation. When truncation is on, ``gamma``
    must exceed ``eta`` so the dither can still flip any truncated value.
    """

    gamma: float
    eta: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError(f"dither scale gamma must be positive, got {self.gamma}")
        if self.eta is not None:
            if not self.eta > 0:
                raise ConfigError(f"truncation threshold eta must be positive, got {self.eta}")
            if not self.gamma > self.eta:
                raise ConfigError(
                    f"gamma must exceed eta (gamma={self.gamma}, eta={self.eta}): "
                    "the dither range has to dominate the truncated data range"
                )


@dataclass(frozen=True)
class BitPairSample:
    """A pair of independently dithered sign vectors for the same input.

    ``bits1`` and ``bits2`` have identical shape, entries exactly +-1.
    ``gamma`` records the dither scale used at quantization time; estimators
    that rescale by gamma verify it to refuse silently-wrong reconstructions.
    """

    bits1: np.ndarray
    bits2: np.ndarray
    gamma: float

    def __post_init__(self):
        if self.bits1.shape != self.bits2.shape:
            raise ConfigError(
                f"bit vectors must have identical shape, got {self.bits1.shape} vs {self.bits2.shape}"
            )

    @property
    def n(self) -> int:
        return 1 if self.bits1.ndim == 1 else self.bits1.shape[0]

    @property
    def dim(self) -> int:
        return self.bits1.shape[-1]


def sign_pm(x):
    """Sign with the +1-at-zero convention, returned as float +-1."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def truncate(x, eta: float):
    """Clip magnitudes at eta, preserving sign: sign(x) * min(|x|, eta)."""
    if not eta > 0:
        raise ConfigError(f"truncation threshold eta must be positive, got {eta}")
    return np.clip(x, -eta, eta)


def dither_sign(x, gamma: float, rng: np.random.Generator):
    """Add uniform noise on [-gamma, gamma] and take the sign.

    Works on scalars and arrays (one independent dither per entry). Returns
    +-1.0 with sign(0) = +1.
    """
    if not gamma > 0:
        raise ConfigError(f"dither scale gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=float)
    noise = rng.uniform(-gamma, gamma, size=x.shape)
    out = sign_pm(x + noise)
    return float(out) if out.ndim == 0 else out


def quantize_covariate_pair(x, cfg: QuantConfig,
                            rng1: np.random.Generator | None = None,
                            rng2: np.random.Generator | None = None) -> BitPairSample:
    """Quantize covariate vectors to two independently dithered bit vectors.

    ``x`` is a single vector (d,) or a batch (n, d). Truncation is applied
    first when ``cfg.eta`` is set. The two dithers must be independent; by
    default they come from the two covariate channels of ``cfg.seed``.
    Passing one stream for both draws the noise arrays from it sequentially,
    which is equally valid. Correlated dithers would bias every
    product-of-bits estimate built on the output.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ConfigError("cannot quantize an empty covariate array")
    if rng1 is None:
        rng1 = stream(cfg.seed, CH_DITHER_X1)
        rng2 = stream(cfg.seed, CH_DITHER_X2) if rng2 is None else rng2
    elif rng2 is None:
        rng2 = rng1
    if cfg.eta is not None:
        x = truncate(x, cfg.eta)
    bits1 = sign_pm(x + rng1.uniform(-cfg.gamma, cfg.gamma, size=x.shape))
    bits2 = sign_pm(x + rng2.uniform(-cfg.gamma, cfg.gamma, size=x.shape))
    return BitPairSample(bits1=bits1, bits2=bits2, gamma=cfg.gamma)


def quantize_response(y, cfg: QuantConfig, rng: np.random.Generator | None = None):
    """Quantize responses to single bits: truncate (optional), dither, sign."""
    y = np.asarray(y, dtype=float)
    if rng is None:
        rng = stream(cfg.seed, CH_DITHER_Y)
    if cfg.eta is not None:
        y = truncate(y, cfg.eta)
    return dither_sign(y, cfg.gamma, rng)
