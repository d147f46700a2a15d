#!/usr/bin/env python3
"""Render a run's metrics CSV: predictions vs truth, running MCAE, and the
dominant change bit. Optionally overlays true change points from a ground
truth sidecar.

Usage: plot_run.py <metrics.csv> [truth.csv] [-o out.png]
"""

import argparse
import csv
import sys


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("metrics")
    ap.add_argument("truth", nargs="?", default=None)
    ap.add_argument("-o", "--out", default=None, help="write PNG instead of showing")
    args = ap.parse_args()

    try:
        import matplotlib
        if args.out:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        sys.exit("matplotlib is required: pip install matplotlib")

    rows = read_csv(args.metrics)
    steps = [int(r["step"]) for r in rows]
    pred = [float(r["prediction"]) for r in rows]
    truth = [float(r["truth"]) for r in rows]
    mcae = [float(r["mcae"]) for r in rows]
    bits = [int(r["dominant_s"]) if r["dominant_s"] else 0 for r in rows]

    change_steps = []
    if args.truth:
        for r in read_csv(args.truth):
            if r["is_change"] == "1":
                change_steps.append(int(r["step"]))

    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(9, 6), height_ratios=[2, 1])
    ax1.plot(steps, truth, ".", color="gray", label="observed")
    ax1.plot(steps, pred, "-", color="tab:blue", label="one-step-ahead prediction")
    first_detection = bits.index(1) if 1 in bits else -1
    for i, (s, b) in enumerate(zip(steps, bits)):
        if b:
            ax1.axvline(s, color="tab:orange", alpha=0.5,
                        label="detected change" if i == first_detection else None)
    for i, s in enumerate(change_steps):
        ax1.axvline(s, color="black", linestyle=":", alpha=0.7,
                    label="true change" if i == 0 else None)
    ax1.legend(loc="best", fontsize=8)
    ax1.set_ylabel("target")

    ax2.plot(steps, mcae, color="tab:red")
    ax2.set_ylabel("running MCAE")
    ax2.set_xlabel("step")

    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=130)
        print(f"wrote {args.out}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
