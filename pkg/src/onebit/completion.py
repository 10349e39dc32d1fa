"""1-bit low-rank matrix completion.

Observations are (row, col, bit) triplets: a uniformly sampled cell of the
target matrix, observed through additive noise and the dithered 1-bit
quantizer. The estimator solves

    minimize_{||Theta||_max <= alpha}  (1/2n) sum_k (Theta[r_k, c_k]
                                        - gamma * y_k)^2 + lam * ||Theta||_nu

which touches the data only through the cell-aggregated sum matrix J1 and
count matrix J2, so each solver iteration costs O(d^2) plus one SVD.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .admm import SolveDiagnostics, SolverConfig, admm_mc
from .covariance import HEAVYTAILED, SUBGAUSSIAN
from .exceptions import ConfigError
from .quantize import QuantConfig, quantize_response
from .rng import CH_DITHER_Y, stream

logger = logging.getLogger(__name__)

# Dither-floor warnings repeat identically across a sweep; emit each once.
_warned_floors: set[tuple[float, float]] = set()


class McObservation(NamedTuple):
    """One quantized observation: a matrix cell and its +-1 response bit."""

    row: int
    col: int
    y_bit: int


@dataclass
class McParams:
    """Max-norm bound, noise proxies, tuning constants, derived parameters.

    ``alpha_star`` bounds the target's max norm (set to the true value in
    synthetic runs; must be supplied in blind use). ``sigma`` is the
    sub-Gaussian noise proxy, ``second_moment`` the heavy-tailed bound on
    E|eps|^2. ``gamma``/``eta``/``lam`` are filled by ``select_mc_params``
    or supplied directly.
    """

    alpha_star: float
    regime: str = SUBGAUSSIAN
    delta: float = 2.0
    sigma: float = 1.0
    second_moment: float = 1.0
    c13: float = 1.0
    c14: float = 1.0
    c15: float = 1.0
    c16: float = 1.5
    c17: float = 1.0
    gamma: Optional[float] = None
    eta: Optional[float] = None
    lam: Optional[float] = None

    def __post_init__(self):
        if not self.alpha_star > 0:
            raise ConfigError(f"max-norm bound alpha_star must be positive, got {self.alpha_star}")
        if not self.delta > 1:
            raise ConfigError(f"confidence parameter delta must exceed 1, got {self.delta}")
        if self.regime not in (SUBGAUSSIAN, HEAVYTAILED):
            raise ConfigError(f"unknown regime {self.regime!r}")
        if self.regime == HEAVYTAILED and self.c16 <= self.c15:
            raise ConfigError(
                f"heavy-tailed regime needs c16 > c15 (gamma > eta), got c15={self.c15}, c16={self.c16}"
            )


@dataclass(frozen=True)
class McSelected:
    gamma: float
    lam: float
    eta: Optional[float] = None


def select_mc_params(regime: str, n: int, d: int, p: McParams) -> McSelected:
    """Dither scale, truncation level, and nuclear-norm weight.

    sub-Gaussian:
        gamma = c13 * max(alpha*, sigma) * sqrt(log(n / (delta d log 2d)))
        lam   = c14 * max(alpha*, sigma) * sqrt(log n * delta log d / (n d))
    heavy-tailed:
        eta   = c15 * max(alpha*, sqrt(M2)) * (n / (delta d log d))^(1/4)
        gamma = c16 * max(alpha*, sqrt(M2)) * (n / (delta d log d))^(1/4)
        lam   = c17 * max(alpha*, sqrt(M2)) * (delta log d / (n d^3))^(1/4)

    A selected gamma below 2 * max(alpha*, scale) violates the scheme's
    working hypothesis; that is reported as a warning with the deficit, not
    an error, since it concerns unknowable true scales.
    """
    logd = math.log(d)
    if regime == SUBGAUSSIAN:
        scale = max(p.alpha_star, p.sigma)
        arg = n / (p.delta * d * math.log(2 * d))
        if arg <= 1.0:
            raise ConfigError(
                f"sub-Gaussian selection needs n > delta d log(2d) = "
                f"{p.delta * d * math.log(2 * d):.1f}, got n={n}"
            )
        gamma = p.c13 * scale * math.sqrt(math.log(arg))
        lam = p.c14 * scale * math.sqrt(math.log(n) * p.delta * logd / (n * d))
        eta = None
    elif regime == HEAVYTAILED:
        if p.c16 <= p.c15:
            raise ConfigError(f"need c16 > c15, got c15={p.c15}, c16={p.c16}")
        scale = max(p.alpha_star, math.sqrt(p.second_moment))
        base = (n / (p.delta * d * logd)) ** 0.25
        eta = p.c15 * scale * base
        gamma = p.c16 * scale * base
        lam = p.c17 * scale * (p.delta * logd / (n * d**3)) ** 0.25
    else:
        raise ConfigError(f"unknown regime {regime!r}")
    floor = 2.0 * scale
    if gamma < floor:
        key = (round(gamma, 6), round(floor, 6))
        level = logging.DEBUG if key in _warned_floors else logging.WARNING
        _warned_floors.add(key)
        logger.log(
            level,
            "selected dither scale gamma=%.4g is below the working floor "
            "2*max(alpha*, scale)=%.4g (deficit %.4g); unbiasedness may degrade",
            gamma, floor, floor - gamma,
        )
    return McSelected(gamma=gamma, lam=lam, eta=eta)


def _as_triplet_arrays(obs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(obs, tuple) and len(obs) == 3:
        rows, cols, bits = (np.asarray(a) for a in obs)
    else:
        arr = np.asarray(list(obs))
        if arr.size == 0:
            return np.empty(0, dtype=int), np.empty(0, dtype=int), np.empty(0)
        rows, cols, bits = arr[:, 0].astype(int), arr[:, 1].astype(int), arr[:, 2]
    return rows.astype(int), cols.astype(int), np.asarray(bits, dtype=float)


def aggregate_observations(obs: Union[Sequence[McObservation], tuple, Iterable[McObservation]],
                           gamma: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate triplets into the per-cell sum matrix J1 and count matrix J2.

    J1[i, j] sums gamma * y_bit over the observations of cell (i, j);
    J2[i, j] counts them. ``obs`` is a sequence of McObservation or a
    (rows, cols, bits) array triple.
    """
    rows, cols, bits = _as_triplet_arrays(obs)
    if rows.size and (rows.min() < 0 or rows.max() >= d or cols.min() < 0 or cols.max() >= d):
        raise ConfigError(f"observation indices out of range for d={d}")
    if bits.size and not np.all(np.abs(bits) == 1.0):
        raise ConfigError("observation bits must be exactly +-1")
    j1 = np.zeros((d, d))
    j2 = np.zeros((d, d))
    np.add.at(j1, (rows, cols), gamma * bits)
    np.add.at(j2, (rows, cols), 1.0)
    return j1, j2


def quantize_mc_responses(y: np.ndarray, gamma: float, eta: Optional[float],
                          seed: int) -> np.ndarray:
    """Quantize raw completion responses to +-1 bits on the response channel."""
    cfg = QuantConfig(gamma=gamma, eta=eta, seed=seed)
    return quantize_response(y, cfg, stream(seed, CH_DITHER_Y))


def write_observations(path: str, obs) -> None:
    """Write observation triplets as CSV rows ``row,col,ybit`` (with header)."""
    rows, cols, bits = _as_triplet_arrays(obs)
    lines = ["row,col,ybit"]
    lines.extend(f"{r},{c},{int(b)}" for r, c, b in zip(rows, cols, bits))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_observations(path: str) -> list[McObservation]:
    """Read observation triplets from the ``row,col,ybit`` CSV format."""
    out = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "row,col,ybit":
            raise ConfigError(f"unexpected observation header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ConfigError(f"malformed observation row at line {lineno}: {line!r}")
            out.append(McObservation(int(parts[0]), int(parts[1]), int(parts[2])))
    return out


def mc_objective(theta: np.ndarray, j1: np.ndarray, j2: np.ndarray, n_total: int,
                 lam: float) -> float:
    """Data fit plus nuclear penalty, up to the theta-independent constant."""
    fit = 0.0
    if n_total > 0:
        fit = 0.5 * float(np.sum(j2 * theta**2) - 2.0 * np.sum(j1 * theta)) / n_total
    return fit + lam * float(np.linalg.svd(theta, compute_uv=False).sum())


def estimate_completion(j1: np.ndarray, j2: np.ndarray, p: McParams,
                        solver: SolverConfig | None = None) -> np.ndarray:
    """Solve the constrained program on aggregated observations."""
    if p.lam is None:
        raise ConfigError("McParams.lam is unset; call select_mc_params first")
    n_total = int(round(np.asarray(j2).sum()))
    theta, _ = admm_mc(j1, j2, n_total, p.alpha_star, p.lam, solver)
    return theta


@dataclass
class CompletionResult:
    theta: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    solve: SolveDiagnostics | None = None


def run_completion(obs, p: McParams, d: int,
                   solver: SolverConfig | None = None) -> CompletionResult:
    """Aggregate triplets, select parameters if unset, and solve."""
    # materialize once: obs may be a one-shot iterable
    triplets = _as_triplet_arrays(obs)
    if triplets[0].size == 0:
        raise ConfigError("no observations to complete from")
    if p.lam is None or p.gamma is None:
        sel = select_mc_params(p.regime, triplets[0].size, d, p)
        p.gamma = sel.gamma if p.gamma is None else p.gamma
        p.lam = sel.lam if p.lam is None else p.lam
        p.eta = sel.eta if p.eta is None else p.eta
    j1, j2 = aggregate_observations(triplets, p.gamma, d)
    n_total = int(round(j2.sum()))
    theta, solve = admm_mc(j1, j2, n_total, p.alpha_star, p.lam, solver)
    diagnostics = {
        "n": n_total, "d": d, "gamma": p.gamma, "eta": p.eta, "lam": p.lam,
        "alpha_star": p.alpha_star,
        "objective": mc_objective(theta, j1, j2, n_total, p.lam),
    }
    return CompletionResult(theta=theta, diagnostics=diagnostics, solve=solve)
