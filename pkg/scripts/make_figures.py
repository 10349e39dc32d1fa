#!/usr/bin/env python3
"""Regenerate the four log-log benchmark figures from saved summary CSVs.

Expects the directory layout produced by run_all_desk.py (one subdirectory
per scenario containing summary.csv) and renders one panel per scenario
into a 4x2 figure.
"""

import argparse
import csv
import math
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REFERENCE = {
    ("cov", "subgaussian"): ("log(n)/sqrt(n)", lambda n: math.log(n) / math.sqrt(n)),
    ("cov", "heavytailed"): ("n^-1/4", lambda n: n**-0.25),
    ("qccs", "subgaussian"): ("log(n)/sqrt(n)", lambda n: math.log(n) / math.sqrt(n)),
    ("qccs", "heavytailed"): ("n^-1/4", lambda n: n**-0.25),
    ("cs", "subgaussian"): ("sqrt(log(n)/n)", lambda n: math.sqrt(math.log(n) / n)),
    ("cs", "heavytailed"): ("n^-1/3", lambda n: n ** (-1 / 3)),
    ("mc", "subgaussian"): ("sqrt(log(n)/n)", lambda n: math.sqrt(math.log(n) / n)),
    ("mc", "heavytailed"): ("n^-1/4", lambda n: n**-0.25),
}


def load_curves(summary_path):
    curves = defaultdict(list)
    with open(summary_path, newline="") as fh:
        for row in csv.DictReader(fh):
            curves[(int(row["d"]), int(row["s_or_r"]))].append(
                (int(row["n"]), float(row["mean"]))
            )
    return {k: sorted(v) for k, v in curves.items()}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--results", default="desk_results")
    parser.add_argument("--out", default="desk_results/curves.png")
    args = parser.parse_args()

    fig, axes = plt.subplots(4, 2, figsize=(11, 16))
    for ax, ((problem, regime), (label, ref)) in zip(axes.flat, REFERENCE.items()):
        summary = Path(args.results) / f"{problem}_{regime}" / "summary.csv"
        if not summary.exists():
            ax.set_title(f"{problem}/{regime} (missing)")
            continue
        curves = load_curves(summary)
        for (d, s), pts in sorted(curves.items()):
            ax.plot([n for n, _ in pts], [e for _, e in pts], "o-", label=f"d={d}, s|r={s}")
        first = curves[min(curves)][0]
        scale = first[1] / ref(first[0])
        ns = sorted({n for pts in curves.values() for n, _ in pts})
        ax.plot(ns, [scale * ref(n) for n in ns], "k--", label=label)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_title(f"{problem} / {regime}")
        ax.set_xlabel("n")
        ax.set_ylabel("mean error")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
