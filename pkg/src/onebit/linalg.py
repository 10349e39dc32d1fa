"""Shared dense matrix primitives at desk scale (d up to ~500).

Thresholding operators, the nuclear-norm prox (SVD soft threshold), PSD
repair by eigenvalue clipping, max-norm projection, and a norm bundle.
Backends are numpy/scipy dense decompositions; the accuracy contract is
reconstruction error below 1e-8 * ||A||_F, which LAPACK comfortably meets
at these sizes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

# Relative symmetry tolerance: inputs violating it are rejected, not repaired.
SYMMETRY_RTOL = 1e-12


def require_symmetric(a: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate symmetry of a square matrix; returns the input unchanged."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, np.abs(a).max(initial=0.0))
    gap = np.abs(a - a.T).max(initial=0.0)
    if gap > rtol * scale:
        raise ConfigError(
            f"matrix is not symmetric: max |a_ij - a_ji| = {gap:.3e} exceeds "
            f"{rtol:.0e} relative tolerance"
        )
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    """(A + A^T) / 2, for estimator-internal use where tiny asymmetry is expected."""
    a = np.asarray(a, dtype=float)
    gap = np.abs(a - a.T).max(initial=0.0)
    if gap > 0:
        logger.debug("symmetrizing matrix with asymmetry %.3e", gap)
    return 0.5 * (a + a.T)


def hard_threshold(a, zeta: float):
    """Zero out entries with magnitude strictly below zeta; keep |x| >= zeta."""
    if zeta < 0:
        raise ConfigError(f"hard threshold must be nonnegative, got {zeta}")
    a = np.asarray(a, dtype=float)
    return np.where(np.abs(a) >= zeta, a, 0.0)


def soft_threshold(x, beta: float):
    """Entrywise shrink toward zero: sign(x) * max(|x| - beta, 0)."""
    if beta < 0:
        raise ConfigError(f"soft threshold must be nonnegative, got {beta}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - beta, 0.0)


def svd_soft_threshold(a: np.ndarray, beta: float) -> np.ndarray:
    """Soft-threshold the singular values: the prox of beta * nuclear norm."""
    if beta < 0:
        raise ConfigError(f"singular value threshold must be nonnegative, got {beta}")
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("svd_soft_threshold requires finite entries")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    s = np.maximum(s - beta, 0.0)
    return (u * s) @ vt


def positive_part(a: np.ndarray, *, presymmetrize: bool = False) -> np.ndarray:
    """Project a symmetric matrix onto the PSD cone by clipping eigenvalues.

    Eigenvectors are unchanged; eigenvalues become max(lambda_i, 0). With
    ``presymmetrize`` the input is symmetrized first instead of validated
    (estimator-internal path).
    """
    a = symmetrize(a) if presymmetrize else require_symmetric(a)
    w, v = np.linalg.eigh(a)
    w = np.maximum(w, 0.0)
    return (v * w) @ v.T


def clamp_max_norm(a, alpha: float):
    """Clip entries to [-alpha, alpha]: the Frobenius projection onto the max-norm ball."""
    if not alpha > 0:
        raise ConfigError(f"max-norm radius must be positive, got {alpha}")
    return np.clip(np.asarray(a, dtype=float), -alpha, alpha)


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(scipy.linalg.eigvalsh(a, subset_by_index=[0, 0])[0])


@dataclass(frozen=True)
class MatrixNorms:
    op: float
    frobenius: float
    max: float
    nuclear: float
    one_inf: float


def norms(a: np.ndarray) -> MatrixNorms:
    """All five matrix norms used by the estimators and their error metrics."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("norms require finite entries")
    s = np.linalg.svd(a, compute_uv=False)
    return MatrixNorms(
        op=float(s[0]) if s.size else 0.0,
        frobenius=float(np.linalg.norm(a)),
        max=float(np.abs(a).max(initial=0.0)),
        nuclear=float(s.sum()),
        one_inf=float(np.abs(a).sum(axis=0).max(initial=0.0)),
    )
