#!/usr/bin/env python3
"""Run all eight shipped desk-scale scenarios and print their slope fits.

Writes one output directory per scenario under the given root (default
./desk_results) and finishes with a summary table. Takes several minutes
single-threaded; set ONEBIT_THREADS to parallelize trials.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

from onebit.harness import default_spec, emit_outputs, fit_slope, run_experiment

SCENARIOS = [
    ("cov", "subgaussian"), ("cov", "heavytailed"),
    ("qccs", "subgaussian"), ("qccs", "heavytailed"),
    ("cs", "subgaussian"), ("cs", "heavytailed"),
    ("mc", "subgaussian"), ("mc", "heavytailed"),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="desk_results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=15)
    parser.add_argument("--paper-scale", action="store_true")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    root = Path(args.out)
    rows = []
    for problem, regime in SCENARIOS:
        spec = default_spec(problem, regime, trials=args.trials, seed=args.seed,
                            paper_scale=args.paper_scale)
        start = time.perf_counter()
        run = run_experiment(spec)
        elapsed = time.perf_counter() - start
        out_dir = root / f"{problem}_{regime}"
        emit_outputs(run.records, spec, str(out_dir))
        for d, s in spec.grid:
            fit = fit_slope(run.records, d, s)
            rows.append((problem, regime, d, s, fit.slope, fit.r2,
                         fit.mean_errors[0], fit.mean_errors[-1]))
        print(f"{problem}/{regime}: {len(run.records)} records in {elapsed:.0f}s "
              f"-> {out_dir} ({len(run.failures)} failures)")

    print(f"\n{'problem':8s} {'regime':12s} {'d':>5s} {'s|r':>4s} "
          f"{'slope':>7s} {'R2':>5s} {'err@first':>10s} {'err@last':>9s}")
    for problem, regime, d, s, slope, r2, e0, e1 in rows:
        print(f"{problem:8s} {regime:12s} {d:5d} {s:4d} {slope:7.3f} {r2:5.2f} "
              f"{e0:10.4f} {e1:9.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
