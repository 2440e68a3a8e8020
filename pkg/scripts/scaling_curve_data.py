#!/usr/bin/env python3
"""Tabulate the normalized noise scaling function and its asymptotes.

Writes CSV with one row per distance ratio. With --plot, also renders
the log-log curve with both asymptote lines and their crossing point.
"""

import argparse
import contextlib
import csv
import sys

import numpy as np

from patchnoise.spectrum import ASYMPTOTE_CROSSING_RHO, scaling_function


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho-min", type=float, default=1e-3)
    ap.add_argument("--rho-max", type=float, default=1e3)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--output", help="CSV path (default: stdout)")
    ap.add_argument("--plot", help="write a PNG to this path as well")
    args = ap.parse_args(argv)

    rho = np.geomspace(args.rho_min, args.rho_max, args.n)
    s = np.array([scaling_function(r) for r in rho])
    short = 1.0 / rho
    far = 0.75 / rho**4

    ctx = open(args.output, "w", newline="") if args.output else contextlib.nullcontext(sys.stdout)
    with ctx as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rho", "s", "short_asymptote", "long_asymptote"])
        for row in zip(rho, s, short, far):
            writer.writerow([f"{v:.12e}" for v in row])

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5.0, 3.8))
        ax.loglog(rho, s, "k-", lw=1.5, label="s(rho)")
        ax.loglog(rho, short, "b--", lw=0.9, label="1/rho")
        ax.loglog(rho, far, "r--", lw=0.9, label="3/(4 rho^4)")
        ax.axvline(ASYMPTOTE_CROSSING_RHO, color="0.6", lw=0.7)
        ax.set_xlabel("d / zeta")
        ax.set_ylabel("normalized field noise density")
        ax.set_ylim(s.min() * 0.5, min(short.max(), 1e4) * 2)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=160)
        print(f"plot written to {args.plot}", file=sys.stderr)

    return 0


if __name__ == "__main__":
    raise SystemExit(main())
