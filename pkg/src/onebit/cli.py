"""Command line interface.

    onebit cov|qccs|cs|mc --regime subgaussian|heavytailed [options]

Runs one experiment family over its (d, s|r) x n grid, averages trials, and
writes results.csv, summary.csv, and a plot script to --out. Exit codes:
0 success, 2 configuration error, 3 convergence failure at any grid point.
Thread count comes from the ONEBIT_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .defaults import DESK_GRIDS, N_GRIDS, PAPER_GRIDS
from .exceptions import ConfigError
from .harness import ExperimentSpec, emit_outputs, fit_slope, run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit",
        description="1-bit quantized estimation benchmarks (covariance, regression, "
                    "compressed sensing, matrix completion)",
    )
    sub = parser.add_subparsers(dest="problem", required=True)
    for problem, help_text in [
        ("cov", "sparse covariance estimation"),
        ("qccs", "sparse regression with quantized covariates"),
        ("cs", "1-bit compressed sensing"),
        ("mc", "1-bit low-rank matrix completion"),
    ]:
        p = sub.add_parser(problem, help=help_text)
        p.add_argument("--regime", choices=("subgaussian", "heavytailed"),
                       default="subgaussian")
        p.add_argument("--d", type=int, nargs="+", default=None,
                       help="dimension(s); combined with every --s/--r value")
        size_flag = "--r" if problem == "mc" else "--s"
        p.add_argument(size_flag, dest="s_or_r", type=int, nargs="+", default=None,
                       help="sparsity (or rank for mc)")
        p.add_argument("--n-list", type=int, nargs="+", default=None,
                       help="sample sizes, strictly increasing")
        p.add_argument("--trials", type=int, default=15)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-truncation", action="store_true",
                       help="skip the truncation step (heavy-tailed ablation)")
        p.add_argument("--paper-scale", action="store_true",
                       help="use the original large-dimension grids (slow)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="NAME=VALUE",
                       help="override a tuning constant, e.g. --set c2=0.5")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"expected NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"constant {name!r} needs a numeric value, got {value!r}") from exc
    return out


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    grids = PAPER_GRIDS if args.paper_scale else DESK_GRIDS
    if args.d is None and args.s_or_r is None:
        grid = grids[(args.problem, args.regime)]
    else:
        default_grid = grids[(args.problem, args.regime)]
        ds = args.d if args.d is not None else sorted({d for d, _ in default_grid})
        ss = args.s_or_r if args.s_or_r is not None else sorted({s for _, s in default_grid})
        grid = tuple((d, s) for d in ds for s in ss)
    n_list = tuple(args.n_list) if args.n_list else N_GRIDS[args.problem]
    return ExperimentSpec(
        problem=args.problem, regime=args.regime, grid=grid, n_list=n_list,
        trials=args.trials, seed=args.seed, no_truncation=args.no_truncation,
        constants=_parse_overrides(args.overrides),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        spec = spec_from_args(args)
    except ConfigError as exc:
        logger.error("invalid configuration: %s", exc)
        return EXIT_CONFIG

    run = run_experiment(spec)
    if not run.records:
        logger.error("no grid point completed")
        return EXIT_CONVERGENCE if run.convergence_failures else EXIT_CONFIG

    paths = emit_outputs(run.records, spec, args.out)
    for d, s in spec.grid:
        try:
            fit = fit_slope(run.records, d, s)
            logger.info("curve d=%d s|r=%d: slope %.3f (R2 %.3f), mean errors %s",
                        d, s, fit.slope, fit.r2,
                        " ".join(f"{e:.4f}" for e in fit.mean_errors))
        except ConfigError:
            pass
    logger.info("wrote %s", ", ".join(sorted(paths.values())))

    if run.convergence_failures:
        logger.error("%d grid point(s) hit convergence failures", len(run.convergence_failures))
        return EXIT_CONVERGENCE
    if run.failures:
        logger.error("%d grid point(s) failed with configuration errors", len(run.failures))
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
