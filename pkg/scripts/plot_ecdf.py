"""Plot the ECDF CSV written by ``prrtc bench --ecdf``.

    python scripts/plot_ecdf.py out_ecdf.csv [more_ecdf.csv ...] -o ecdf.png

Needs matplotlib (``pip install artifact[plot]``). One panel per metric
(planning time, path cost); one curve per input file.
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LABELS = {"time_ms": "planning time (ms)", "cost": "path cost (arclength)"}


def read_ecdf(path):
    curves = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            curves.setdefault(row["metric"], []).append((float(row["value"]), float(row["fraction_solved"])))
    return curves


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--out", default="ecdf.png")
    args = ap.parse_args(argv)

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for path in args.csv:
        curves = read_ecdf(path)
        for ax, metric in zip(axes, ("time_ms", "cost")):
            pts = curves.get(metric, [])
            if pts:
                xs, ys = zip(*pts)
                ax.step((xs[0],) + xs, (0.0,) + ys, where="post", label=Path(path).stem)
    for ax, metric in zip(axes, ("time_ms", "cost")):
        ax.set_xlabel(LABELS[metric])
        ax.set_ylabel("fraction solved")
        ax.set_ylim(0, 1.02)
        ax.grid(alpha=0.3)
    axes[0].set_xscale("log")
    axes[1].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
