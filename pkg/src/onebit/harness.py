"""Experiment orchestration: grids, trials, slope fits, CSV output.

One experiment sweeps a (d, s|r) grid over a list of sample sizes, runs
independent trials at each point, and records one error value per trial.
Trial streams are derived from (seed, problem, regime, d, s, n, trial), so
results are independent of execution order and the whole run is
reproducible byte for byte.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import completion, covariance, datagen, regression
from .admm import SolverConfig
from .defaults import (
    CONSTANTS,
    DEFAULTS_VERSION,
    DESK_GRIDS,
    METRIC_BY_PROBLEM,
    N_GRIDS,
    PAPER_GRIDS,
    REFERENCE_RATES,
    SOLVER,
)
from .exceptions import ConfigError, ConvergenceError
from .rng import CH_DATA, CH_SAMPLING, derive_seed, stream

logger = logging.getLogger(__name__)

PROBLEMS = ("cov", "qccs", "cs", "mc")
REGIMES = ("subgaussian", "heavytailed")
_PROBLEM_TAG = {p: i for i, p in enumerate(PROBLEMS)}
_REGIME_TAG = {r: i for i, r in enumerate(REGIMES)}

THREADS_ENV = "ONEBIT_THREADS"


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: problem family, regime, (d, s|r) grid, n grid, trials."""

    problem: str
    regime: str
    grid: tuple[tuple[int, int], ...]
    n_list: tuple[int, ...]
    trials: int = 15
    seed: int = 0
    no_truncation: bool = False
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.grid:
            raise ConfigError("grid must contain at least one (d, s_or_r) pair")
        ns = tuple(self.n_list)
        if len(ns) < 1 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError(f"n_list must be strictly increasing, got {ns}")

    def merged_constants(self) -> dict:
        base = dict(CONSTANTS[(self.problem, self.regime)])
        base.update(self.constants)
        return base


@dataclass(frozen=True)
class ErrorRecord:
    """One measurement: grid point, trial index, metric name, value."""

    problem: str
    regime: str
    n: int
    d: int
    s_or_r: int
    trial: int
    metric: str
    value: float
    params_json: str

    CSV_FIELDS = ("problem", "regime", "n", "d", "s_or_r", "trial", "metric", "value", "params_json")


def default_spec(problem: str, regime: str, *, trials: int = 15, seed: int = 0,
                 no_truncation: bool = False, paper_scale: bool = False,
                 constants: Optional[dict] = None) -> ExperimentSpec:
    """The shipped scenario for a problem family at desk or paper scale."""
    grids = PAPER_GRIDS if paper_scale else DESK_GRIDS
    return ExperimentSpec(
        problem=problem, regime=regime, grid=grids[(problem, regime)],
        n_list=N_GRIDS[problem], trials=trials, seed=seed,
        no_truncation=no_truncation, constants=constants or {},
    )


def _solver_from(consts: dict, family: str) -> SolverConfig:
    s = SOLVER[family]
    return SolverConfig(rho=float(consts.get("rho", s["rho"])),
                       tol_primal=s["tol_primal"], tol_dual=s["tol_dual"],
                       max_iter=int(consts.get("max_iter", s["max_iter"])))


def _lasso_solver(consts: dict) -> SolverConfig:
    return _solver_from(consts, "lasso")


def _mc_solver(consts: dict) -> SolverConfig:
    return _solver_from(consts, "mc")


def _cov_trial(regime, d, s, n, consts, no_trunc, trial_seed):
    sig = datagen.make_sparse_cov(d, s)
    v = float(sig.diagonal().max())
    rng = stream(trial_seed, CH_DATA)
    if regime == "subgaussian":
        x = datagen.sample_gaussian(sig, n, rng)
        p = covariance.CovParams(
            regime=regime, delta=consts["delta"], sigma=math.sqrt(v),
            c1=consts["c1"], c2=consts["c2"],
        )
    else:
        # Matlab-style t sampling: correlation input, per-coordinate variance
        # nu/(nu-2) = 1.5. Truncation earns its keep by clipping that
        # inflation back toward the unit-operator-norm target.
        x = datagen.sample_mvt(sig, 6.0, n, rng, mvtrnd_compat=True)
        p = covariance.CovParams(
            regime=regime, delta=consts["delta"], fourth_moment=6.0 * 1.5**2,
            c3=consts["c3"], c4=consts["c4"], c5=consts["c5"],
        )
    fit = covariance.estimate_covariance(x, p, seed=trial_seed, no_truncation=no_trunc)
    err = float(np.linalg.svd(fit.cov_sparse - sig, compute_uv=False)[0])
    return err, fit.params


def _regression_trial(problem, regime, d, s, n, consts, no_trunc, trial_seed):
    theta = datagen.make_sparse_signal(d, s)
    rng = stream(trial_seed, CH_DATA)
    if regime == "subgaussian":
        x = rng.standard_normal((n, d))
    else:
        x = datagen.sample_iid_t(6.0, n, d, rng)
    eps = datagen.sample_noise("regression", regime, n, rng)
    y = x @ theta + eps

    if problem == "qccs":
        mode = regression.QCCS
        sigma2 = math.sqrt(1.0 + math.sqrt(3.0 / 5.0))  # std of y under the noise model
        covp = covariance.CovParams(
            regime=regime, delta=consts["delta"], sigma=1.0, fourth_moment=6.0,
            c1=consts.get("c1", 1.0), c2=consts.get("c2", 0.6),
            c3=consts.get("c3", 0.7), c4=consts.get("c4", 1.0), c5=consts.get("c5", 0.45),
        )
        p = regression.RegressionParams(
            delta=consts["delta"], sigma1=1.0, sigma2=sigma2, fourth_moment=6.0,
            c6=consts.get("c6", 0.25), c7=consts.get("c7", 0.3), cov=covp,
        )
    else:
        mode = regression.CS_SUBG if regime == "subgaussian" else regression.CS_HEAVY
        p = regression.RegressionParams(
            delta=consts["delta"],
            c8=consts.get("c8", 0.6), c8prime=consts.get("c8prime", 1.2),
            c9=consts.get("c9", 1.0), c10=consts.get("c10", 1.5),
            c11=consts.get("c11", 2.2), c12=consts.get("c12", 0.6),
        )
    sel = regression.select_regression_params(mode, regime, n, d, p)
    prob = regression.quantize_regression(x, y, mode, regime, sel, trial_seed,
                                          no_truncation=no_trunc)
    res = regression.run_regression(prob, sel.lam, _lasso_solver(consts))
    err = float(np.linalg.norm(res.theta - theta))
    params = {
        "mode": mode, "lam": sel.lam, "gamma_x": sel.gamma_x, "gamma_y": sel.gamma_y,
        "eta_x": None if no_trunc else sel.eta_x,
        "eta_y": None if no_trunc else sel.eta_y,
        "zeta": sel.zeta, "psd_repaired": res.diagnostics.get("psd_repaired"),
    }
    return err, params


def _mc_trial(regime, d, r, n, consts, no_trunc, trial_seed):
    theta_star = datagen.make_lowrank(d, r, stream(trial_seed, CH_DATA))
    alpha = float(np.abs(theta_star).max())
    rng = stream(trial_seed, CH_SAMPLING)
    rows = rng.integers(0, d, n)
    cols = rng.integers(0, d, n)
    # Noise parameters read as standard deviations here: the two regimes then
    # carry comparable noise levels (0.0025 vs 0.004).
    eps = datagen.sample_noise("mc", regime, n, rng, gaussian_arg="std")
    y = theta_star[rows, cols] + eps
    p = completion.McParams(
        alpha_star=alpha, regime=regime, delta=consts["delta"],
        sigma=1.0 / 400.0, second_moment=(1.0 / 250.0) ** 2,
        c13=consts.get("c13", 0.15), c14=consts.get("c14", 0.05),
        c15=consts.get("c15", 0.091), c16=consts.get("c16", 0.13),
        c17=consts.get("c17", 0.07),
    )
    sel = completion.select_mc_params(regime, n, d, p)
    eta = None if no_trunc else sel.eta
    bits = completion.quantize_mc_responses(y, sel.gamma, eta, trial_seed)
    j1, j2 = completion.aggregate_observations((rows, cols, bits), sel.gamma, d)
    p.gamma, p.lam, p.eta = sel.gamma, sel.lam, eta
    theta = completion.estimate_completion(j1, j2, p, _mc_solver(consts))
    err = float(np.linalg.norm(theta - theta_star))
    params = {
        "gamma": sel.gamma, "eta": eta, "lam": sel.lam, "alpha_star": alpha,
        "spikiness": datagen.spikiness(theta_star),
    }
    return err, params


def run_trial(spec: ExperimentSpec, d: int, s_or_r: int, n: int, trial: int) -> ErrorRecord:
    """Run one (grid point, trial) cell and package the record."""
    consts = spec.merged_constants()
    trial_seed = derive_seed(
        spec.seed, _PROBLEM_TAG[spec.problem], _REGIME_TAG[spec.regime],
        d, s_or_r, n, trial,
    )
    if spec.problem == "cov":
        value, params = _cov_trial(spec.regime, d, s_or_r, n, consts,
                                   spec.no_truncation, trial_seed)
    elif spec.problem in ("qccs", "cs"):
        value, params = _regression_trial(spec.problem, spec.regime, d, s_or_r, n,
                                          consts, spec.no_truncation, trial_seed)
    else:
        value, params = _mc_trial(spec.regime, d, s_or_r, n, consts,
                                  spec.no_truncation, trial_seed)
    params = dict(params)
    params["constants"] = consts
    params["defaults_version"] = DEFAULTS_VERSION
    params["master_seed"] = spec.seed
    return ErrorRecord(
        problem=spec.problem, regime=spec.regime, n=n, d=d, s_or_r=s_or_r,
        trial=trial, metric=METRIC_BY_PROBLEM[spec.problem], value=value,
        params_json=json.dumps(params, sort_keys=True, default=str),
    )


@dataclass
class ExperimentRun:
    records: list[ErrorRecord]
    failures: list[dict]

    @property
    def convergence_failures(self) -> list[dict]:
        return [f for f in self.failures if f["kind"] == "convergence"]


def run_experiment(spec: ExperimentSpec) -> ExperimentRun:
    """Sweep the full grid. A failing grid point is logged and skipped.

    Thread count comes from the ONEBIT_THREADS environment variable
    (default 1). Per-trial streams make results order-independent; records
    are returned in canonical sorted order either way.
    """
    tasks = [(d, s, n, t) for (d, s) in spec.grid for n in spec.n_list
             for t in range(spec.trials)]
    records: list[ErrorRecord] = []
    failures: list[dict] = []
    dead_points: set[tuple[int, int, int]] = set()

    def work(task):
        d, s, n, t = task
        return run_trial(spec, d, s, n, t)

    n_threads = max(1, int(os.environ.get(THREADS_ENV, "1")))
    if n_threads == 1:
        outcomes = []
        for task in tasks:
            point = task[:3]
            if point in dead_points:
                continue
            try:
                outcomes.append(work(task))
            except (ConfigError, ConvergenceError, FloatingPointError) as exc:
                dead_points.add(point)
                kind = "convergence" if isinstance(exc, ConvergenceError) else "config"
                logger.error("grid point d=%d s=%d n=%d failed (%s); skipping rest of point",
                             *point, exc)
                failures.append({"point": point, "kind": kind, "error": str(exc)})
        records.extend(outcomes)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = {pool.submit(work, task): task for task in tasks}
            for fut in concurrent.futures.as_completed(futures):
                task = futures[fut]
                point = task[:3]
                try:
                    records.append(fut.result())
                except (ConfigError, ConvergenceError, FloatingPointError) as exc:
                    if point not in dead_points:
                        dead_points.add(point)
                        kind = "convergence" if isinstance(exc, ConvergenceError) else "config"
                        logger.error("grid point d=%d s=%d n=%d failed (%s)", *point, exc)
                        failures.append({"point": point, "kind": kind, "error": str(exc)})
        records = [r for r in records if (r.d, r.s_or_r, r.n) not in dead_points]

    records.sort(key=lambda r: (r.d, r.s_or_r, r.n, r.trial))
    return ExperimentRun(records=records, failures=failures)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    r2: float
    n_values: tuple[int, ...]
    mean_errors: tuple[float, ...]


def mean_errors(records: Sequence[ErrorRecord], d: int, s_or_r: int) -> dict[int, float]:
    """Trial-averaged error per n for one grid curve."""
    by_n: dict[int, list[float]] = {}
    for r in records:
        if r.d == d and r.s_or_r == s_or_r:
            by_n.setdefault(r.n, []).append(r.value)
    return {n: float(np.mean(vs)) for n, vs in sorted(by_n.items())}


def fit_slope(records: Sequence[ErrorRecord], d: int, s_or_r: int) -> SlopeFit:
    """OLS slope of log(mean error) against log(n) for one curve."""
    means = mean_errors(records, d, s_or_r)
    if len(means) < 3:
        raise ConfigError(f"slope fit needs >= 3 distinct n values, got {len(means)}")
    ns = np.array(sorted(means))
    errs = np.array([means[n] for n in ns])
    lx, ly = np.log(ns), np.log(errs)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(slope=float(slope), r2=r2,
                    n_values=tuple(int(n) for n in ns),
                    mean_errors=tuple(float(e) for e in errs))


def _atomic_write(path: str, text: str):
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def emit_outputs(records: Sequence[ErrorRecord], spec: ExperimentSpec, out_dir: str) -> dict[str, str]:
    """Write results.csv, summary.csv, and a matplotlib plot script.

    All writes are atomic (temp file + rename) and byte-deterministic for a
    fixed (spec, seed): UTF-8, LF line endings, floats via repr.
    """
    if not records:
        raise ConfigError("no records to write")
    paths = {}

    lines = [",".join(ErrorRecord.CSV_FIELDS)]
    for r in records:
        params = '"' + r.params_json.replace('"', '""') + '"'
        lines.append(",".join([
            r.problem, r.regime, str(r.n), str(r.d), str(r.s_or_r), str(r.trial),
            r.metric, _fmt(r.value), params,
        ]))
    paths["results"] = os.path.join(out_dir, "results.csv")
    _atomic_write(paths["results"], "\n".join(lines) + "\n")

    lines = ["problem,regime,d,s_or_r,n,trials,mean,stderr"]
    groups: dict[tuple[int, int, int], list[float]] = {}
    for r in records:
        groups.setdefault((r.d, r.s_or_r, r.n), []).append(r.value)
    for (d, s, n), vals in sorted(groups.items()):
        arr = np.array(vals)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        lines.append(",".join([
            spec.problem, spec.regime, str(d), str(s), str(n), str(len(arr)),
            _fmt(float(arr.mean())), _fmt(stderr),
        ]))
    paths["summary"] = os.path.join(out_dir, "summary.csv")
    _atomic_write(paths["summary"], "\n".join(lines) + "\n")

    rate = REFERENCE_RATES[(spec.problem, spec.regime)]
    plot = f'''#!/usr/bin/env python3
"""Log-log error curves for {spec.problem}/{spec.regime} (one curve per (d, s_or_r)).

The dashed reference follows {rate}, anchored at the first grid point of the
first curve; its vertical offset is presentation-only.
"""
import csv
from collections import defaultdict
from math import log, sqrt

import matplotlib.pyplot as plt

curves = defaultdict(list)
with open("summary.csv", newline="") as fh:
    for row in csv.DictReader(fh):
        curves[(int(row["d"]), int(row["s_or_r"]))].append(
            (int(row["n"]), float(row["mean"]))
        )

fig, ax = plt.subplots(figsize=(6, 4.5))
for (d, s), pts in sorted(curves.items()):
    pts.sort()
    ax.plot([n for n, _ in pts], [e for _, e in pts], "o-", label=f"d={{d}}, s|r={{s}}")

ref = lambda n: {rate.replace("n", "float(n)")}
first = sorted(curves[min(curves)])[0]
scale = first[1] / ref(first[0])
ns = sorted({{n for pts in curves.values() for n, _ in pts}})
ax.plot(ns, [scale * ref(n) for n in ns], "k--", label="reference {rate}")

ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("n")
ax.set_ylabel("mean error ({records[0].metric})")
ax.set_title("{spec.problem} / {spec.regime}")
ax.legend()
fig.tight_layout()
fig.savefig("curves_{spec.problem}_{spec.regime}.png", dpi=150)
print("wrote curves_{spec.problem}_{spec.regime}.png")
'''
    paths["plot"] = os.path.join(out_dir, "plot_results.py")
    _atomic_write(paths["plot"], plot)
    return paths
