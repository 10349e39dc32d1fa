"""Two-block ADMM solvers for the convex recovery programs.

``admm_lasso`` minimizes  0.5 * theta^T Q theta - b^T theta + lam * ||theta||_1
for PSD Q, by splitting theta into a smooth block M and a sparse block Z.
The M-update solves a fixed SPD system (Q + rho I), factored once; the
Z-update is entrywise soft thresholding.

``admm_mc`` minimizes  (1/2n) * sum_k (<X_k, Theta> - gamma * y_k)^2
+ lam * ||Theta||_nu  subject to ||Theta||_max <= alpha, where the data
enter only through the cell-aggregated sum matrix J1 and count matrix J2.
The M-update is an entrywise weighted average followed by clipping; the
Z-update soft-thresholds singular values.

Convergence uses the standard two-block criterion: primal residual
||M - Z|| <= tol_primal and dual residual rho * ||Z_t+1 - Z_t|| <= tol_dual.
Both solvers are deterministic and reentrant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import ConfigError, ConvergenceError
from .linalg import clamp_max_norm, min_eigenvalue, soft_threshold, svd_soft_threshold, symmetrize

logger = logging.getLogger(__name__)

# How far below zero Q's smallest eigenvalue may sit before we refuse to
# treat the quadratic as convex.
PSD_SLACK = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Augmented-Lagrangian penalty, stopping tolerances, iteration budget."""

    rho: float = 1.0
    tol_primal: float = 1e-7
    tol_dual: float = 1e-7
    max_iter: int = 5000
    log_every: int = 0

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError(f"penalty rho must be positive, got {self.rho}")
        if not (self.tol_primal > 0 and self.tol_dual > 0):
            raise ConfigError("tolerances must be positive")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass
class SolveDiagnostics:
    iterations: int = 0
    primal_residuals: list[float] = field(default_factory=list)
    dual_residuals: list[float] = field(default_factory=list)
    converged: bool = False


def admm_lasso(q: np.ndarray, b: np.ndarray, lam: float,
               cfg: SolverConfig | None = None, *,
               z0: np.ndarray | None = None,
               u0: np.ndarray | None = None) -> tuple[np.ndarray, SolveDiagnostics]:
    """Solve the l1-regularized quadratic program; returns the sparse iterate Z.

    Parameters
    ----------
    q : (d, d) symmetric PSD matrix (smallest eigenvalue >= -1e-10)
    b : (d,) linear term
    lam : l1 penalty weight, >= 0
    cfg : solver configuration; defaults to SolverConfig()
    z0, u0 : optional warm starts for the sparse iterate and the scaled dual
        (cold start at zero by default; the solution does not depend on them)

    Raises
    ------
    ConvergenceError if the iteration budget is exhausted; the exception
    carries the diagnostics with full residual histories.
    """
    cfg = cfg or SolverConfig()
    if lam < 0:
        raise ConfigError(f"l1 weight must be nonnegative, got {lam}")
    q = symmetrize(q)
    b = np.asarray(b, dtype=float)
    d = b.shape[0]
    if q.shape != (d, d):
        raise ConfigError(f"shape mismatch: Q {q.shape} vs b {b.shape}")
    lam_min = min_eigenvalue(q)
    if lam_min < -PSD_SLACK:
        raise ConfigError(
            f"Q must be positive semi-definite (min eigenvalue {lam_min:.3e}); "
            "repair it with positive_part first"
        )

    # (Q + rho I) is SPD for any rho > 0; factor once, reuse every iteration.
    chol = scipy.linalg.cho_factor(q + cfg.rho * np.eye(d))

    m = np.zeros(d)
    z = np.zeros(d) if z0 is None else np.asarray(z0, dtype=float).copy()
    u = np.zeros(d) if u0 is None else np.asarray(u0, dtype=float).copy()
    diag = SolveDiagnostics()
    for it in range(1, cfg.max_iter + 1):
        m = scipy.linalg.cho_solve(chol, b + cfg.rho * z - u)
        z_new = soft_threshold(m + u / cfg.rho, lam / cfg.rho)
        u = u + cfg.rho * (m - z_new)
        r_primal = float(np.linalg.norm(m - z_new))
        r_dual = float(cfg.rho * np.linalg.norm(z_new - z))
        z = z_new
        diag.iterations = it
        diag.primal_residuals.append(r_primal)
        diag.dual_residuals.append(r_dual)
        if cfg.log_every and it % cfg.log_every == 0:
            logger.info("admm_lasso iter %d: primal %.3e dual %.3e", it, r_primal, r_dual)
        if r_primal <= cfg.tol_primal and r_dual <= cfg.tol_dual:
            diag.converged = True
            return z, diag

    raise ConvergenceError(
        f"admm_lasso did not converge in {cfg.max_iter} iterations "
        f"(primal {diag.primal_residuals[-1]:.3e}, dual {diag.dual_residuals[-1]:.3e})",
        diagnostics=diag,
    )


def admm_mc(j1: np.ndarray, j2: np.ndarray, n_total: int, alpha: float, lam: float,
            cfg: SolverConfig | None = None, *,
            z0: np.ndarray | None = None,
            u0: np.ndarray | None = None) -> tuple[np.ndarray, SolveDiagnostics]:
    """Solve the max-norm-constrained nuclear-norm program on aggregated data.

    Parameters
    ----------
    j1 : (d, d) per-cell sums of the rescaled bits (gamma * y summed per cell)
    j2 : (d, d) per-cell observation counts, nonnegative integers
    n_total : total number of observations, must equal j2.sum()
    alpha : max-norm radius of the feasible set, > 0
    lam : nuclear-norm weight, >= 0
    z0, u0 : optional warm starts (cold start at zero by default)

    Returns the feasible iterate M (max-norm constraint holds exactly).
    """
    cfg = cfg or SolverConfig()
    if lam < 0:
        raise ConfigError(f"nuclear-norm weight must be nonnegative, got {lam}")
    if not alpha > 0:
        raise ConfigError(f"max-norm radius must be positive, got {alpha}")
    j1 = np.asarray(j1, dtype=float)
    j2 = np.asarray(j2, dtype=float)
    if j1.shape != j2.shape or j1.ndim != 2:
        raise ConfigError(f"J1/J2 shape mismatch: {j1.shape} vs {j2.shape}")
    if np.any(j2 < 0):
        raise ConfigError("observation counts must be nonnegative")
    if n_total != int(round(j2.sum())):
        raise ConfigError(f"n_total={n_total} does not match sum(J2)={j2.sum():.0f}")
    if n_total == 0:
        # Penalty-only problem: the nuclear norm (and the feasible set) pin
        # the solution at zero.
        diag = SolveDiagnostics(iterations=1, primal_residuals=[0.0],
                                dual_residuals=[0.0], converged=True)
        return np.zeros_like(j1), diag

    # n rho 1 + J2 is entrywise >= n rho > 0, so the division is always safe.
    denom = n_total * cfg.rho + j2

    m = np.zeros_like(j1)
    z = np.zeros_like(j1) if z0 is None else np.asarray(z0, dtype=float).copy()
    u = np.zeros_like(j1) if u0 is None else np.asarray(u0, dtype=float).copy()
    diag = SolveDiagnostics()
    for it in range(1, cfg.max_iter + 1):
        m = clamp_max_norm((n_total * cfg.rho * z + j1 - n_total * u) / denom, alpha)
        z_new = svd_soft_threshold(u / cfg.rho + m, lam / cfg.rho)
        u = u + cfg.rho * (m - z_new)
        r_primal = float(np.linalg.norm(m - z_new))
        r_dual = float(cfg.rho * np.linalg.norm(z_new - z))
        z = z_new
        diag.iterations = it
        diag.primal_residuals.append(r_primal)
        diag.dual_residuals.append(r_dual)
        if cfg.log_every and it % cfg.log_every == 0:
            logger.info("admm_mc iter %d: primal %.3e dual %.3e", it, r_primal, r_dual)
        if r_primal <= cfg.tol_primal and r_dual <= cfg.tol_dual:
            diag.converged = True
            return m, diag

    raise ConvergenceError(
        f"admm_mc did not converge in {cfg.max_iter} iterations "
        f"(primal {diag.primal_residuals[-1]:.3e}, dual {diag.dual_residuals[-1]:.3e})",
        diagnostics=diag,
    )
