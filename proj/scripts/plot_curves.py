#!/usr/bin/env python3
"""Plot average-throughput curves produced by `bcmac run` / `bcmac preset`.

Usage: plot_curves.py CURVES.csv [-o OUT.png] [--logx]

Reads only the CSV (protocol,slot,avg_throughput); no simulator internals.
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path")
    parser.add_argument("-o", "--out", default=None, help="output image (default: <csv>.png)")
    parser.add_argument("--logx", action="store_true", help="logarithmic slot axis")
    args = parser.parse_args()

    curves = defaultdict(lambda: ([], []))
    with open(args.csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            xs, ys = curves[row["protocol"]]
            xs.append(int(row["slot"]))
            ys.append(float(row["avg_throughput"]))

    fig, ax = plt.subplots(figsize=(8, 5))
    for name, (xs, ys) in curves.items():
        style = "--" if name.endswith("_bound") or name == "upper_bound" else "-"
        ax.plot(xs, ys, style, label=name)
    if args.logx:
        ax.set_xscale("log")
    ax.set_xlabel("slot")
    ax.set_ylabel("average throughput per slot")
    ax.grid(True, alpha=0.3)
    ax.legend()
    out = args.out or args.csv_path.rsplit(".", 1)[0] + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
