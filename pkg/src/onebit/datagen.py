"""Synthetic data generation for the four experiment families.

Ground-truth structures (block-sparse covariance, unit sparse signals,
normalized low-rank matrices) and the samplers/noise distributions used by
the benchmark harness. Everything draws from explicit generator objects, so
fixed (seed, tags) pairs reproduce the same data bit for bit on any
platform; see the rng module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError

# Relative eigenvalue slack accepted when factoring a PSD matrix.
_PSD_TOL = 1e-10


def make_sparse_cov(d: int, s: int) -> np.ndarray:
    """Block-structured covariance with s-sparse columns and unit operator norm.

    Three identical s x s blocks sit in the top-left corner: unit diagonal, a
    strong (1,2)/(2,1) pair equal to 0.99 - (s-2) * 0.03, and 0.03 elsewhere,
    which keeps every row strictly diagonally dominant (off-diagonal row sum
    0.99). The remaining d - 3s coordinates are independent. The whole matrix
    is scaled to operator norm 1.
    """
    if s < 2:
        raise ConfigError(f"block sparsity needs s >= 2, got s={s}")
    if 3 * s > d:
        raise ConfigError(f"construction needs 3s <= d, got s={s}, d={d}")
    block = np.full((s, s), 0.03)
    np.fill_diagonal(block, 1.0)
    pair = 0.99 - (s - 2) * 0.03
    block[0, 1] = block[1, 0] = pair
    cov = np.eye(d)
    for k in range(3):
        cov[k * s:(k + 1) * s, k * s:(k + 1) * s] = block
    op = np.linalg.eigvalsh(cov)[-1]
    return cov / op


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    scale = max(1.0, float(w.max(initial=0.0)))
    if w.min(initial=0.0) < -_PSD_TOL * scale:
        raise FloatingPointError(
            f"covariance is not PSD (min eigenvalue {w.min():.3e}); cannot sample"
        )
    return v * np.sqrt(np.maximum(w, 0.0))


def sample_gaussian(cov: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. rows from the zero-mean Gaussian with the given covariance."""
    a = _psd_factor(cov)
    return rng.standard_normal((n, a.shape[0])) @ a.T


def sample_mvt(cov: np.ndarray, nu: float, n: int, rng: np.random.Generator, *,
               normalize_cov: bool = True, mvtrnd_compat: bool = False) -> np.ndarray:
    """n rows of multivariate Student's t: Gaussian draw over sqrt(chi2_nu / nu).

    With ``normalize_cov`` (default) the rows are rescaled by
    sqrt((nu - 2) / nu) so the population covariance equals ``cov`` exactly.
    ``mvtrnd_compat`` reproduces the Matlab-style semantics instead: the
    input is reduced to its correlation matrix and no variance rescaling is
    applied (population covariance nu / (nu - 2) times the correlation).
    """
    if mvtrnd_compat:
        cov = np.asarray(cov, dtype=float)
        dd = np.sqrt(np.diag(cov))
        cov = cov / np.outer(dd, dd)
        normalize_cov = False
    if normalize_cov and nu <= 2:
        raise ConfigError(f"variance normalization needs nu > 2, got nu={nu}")
    g = sample_gaussian(cov, n, rng)
    chi = rng.chisquare(nu, size=n)
    t = g / np.sqrt(chi / nu)[:, None]
    if normalize_cov:
        t *= math.sqrt((nu - 2.0) / nu)
    return t


def make_sparse_signal(d: int, s: int) -> np.ndarray:
    """Unit-norm exactly s-sparse signal: first s entries equal 1/sqrt(s)."""
    if not 1 <= s <= d:
        raise ConfigError(f"sparsity must satisfy 1 <= s <= d, got s={s}, d={d}")
    theta = np.zeros(d)
    theta[:s] = 1.0 / math.sqrt(s)
    return theta


def make_lowrank(d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Rank-r d x d matrix with unit Frobenius norm from Gaussian factors."""
    if not 1 <= r <= d:
        raise ConfigError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
    left = rng.standard_normal((d, r))
    right = rng.standard_normal((r, d))
    prod = left @ right
    return prod / np.linalg.norm(prod)


def spikiness(a: np.ndarray) -> float:
    """d * ||A||_max / ||A||_F: the well-posedness measure for completion."""
    a = np.asarray(a, dtype=float)
    return a.shape[0] * float(np.abs(a).max()) / float(np.linalg.norm(a))


# Noise menu per (problem, regime). The Gaussian second arguments are read
# as variances by default; the "std" switch exposes the alternative reading.
_REGRESSION_GAUSS_VAR = math.sqrt(3.0 / 5.0)
_MC_GAUSS_VAR = 1.0 / 400.0


def sample_noise(problem: str, regime: str, n: int, rng: np.random.Generator, *,
                 gaussian_arg: str = "variance") -> np.ndarray:
    """i.i.d. additive noise for the regression and completion experiments.

    regression/subgaussian : Gaussian with variance sqrt(3/5)
    regression/heavytailed : 0.3 * t(6)
    mc/subgaussian         : Gaussian with variance 1/400
    mc/heavytailed         : (1/250) * t(3)/sqrt(3)   (unit-variance t(3))
    """
    if gaussian_arg not in ("variance", "std"):
        raise ConfigError(f"gaussian_arg must be 'variance' or 'std', got {gaussian_arg!r}")
    fam = (problem, regime)
    if fam == ("regression", "subgaussian"):
        scale = math.sqrt(_REGRESSION_GAUSS_VAR) if gaussian_arg == "variance" else _REGRESSION_GAUSS_VAR
        return rng.normal(0.0, scale, size=n)
    if fam == ("regression", "heavytailed"):
        return 0.3 * rng.standard_t(6, size=n)
    if fam == ("mc", "subgaussian"):
        scale = math.sqrt(_MC_GAUSS_VAR) if gaussian_arg == "variance" else _MC_GAUSS_VAR
        return rng.normal(0.0, scale, size=n)
    if fam == ("mc", "heavytailed"):
        return (1.0 / 250.0) * rng.standard_t(3, size=n) / math.sqrt(3.0)
    raise ConfigError(f"no noise model for problem={problem!r}, regime={regime!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic grid point: problem family, regime, and sizes."""

    problem: str  # cov | qccs | cs | mc
    regime: str
    d: int
    n: int
    s_or_r: int
    nu: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.problem in ("cov",) and 3 * self.s_or_r > self.d:
            raise ConfigError(f"covariance scenarios need 3s <= d, got s={self.s_or_r}, d={self.d}")
        if self.problem in ("qccs", "cs") and self.s_or_r > self.d:
            raise ConfigError("sparsity cannot exceed the dimension")
        if self.problem == "mc" and self.s_or_r > self.d:
            raise ConfigError("rank cannot exceed the dimension")


def sample_iid_t(nu: float, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """(n, d) matrix of i.i.d. unit-variance scaled t(nu) entries."""
    if nu <= 2:
        raise ConfigError(f"unit-variance scaling needs nu > 2, got nu={nu}")
    return rng.standard_t(nu, size=(n, d)) * math.sqrt((nu - 2.0) / nu)
