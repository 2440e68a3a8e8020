#!/usr/bin/env python3
"""Compare published noise measurements against the fitted model.

Fits the amplitude to the short-range anchor, then emits a tidy CSV
holding both the rescaled data points and model curves for a few
correlation lengths. With --plot, renders the comparison figure.
"""

import argparse
import contextlib
import csv
import math
import sys

import numpy as np

from patchnoise.experiments import ZETA0_DEFAULT, builtin_dataset, fit_dataset, load_dataset
from patchnoise.quantities import AngularFrequency, Length, SurfacePatchModel
from patchnoise.spectrum import noise_density

ZETA_MULTIPLES = (0.65, 1.6, 4.6)
D_RANGE = (7.5e-6, 750e-6)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", help="measurement CSV (default: built-in dataset)")
    ap.add_argument("--zeta0", type=float, default=ZETA0_DEFAULT.value, help="reference correlation length in m")
    ap.add_argument("--n", type=int, default=61, help="points per model curve")
    ap.add_argument("--output", help="CSV path (default: stdout)")
    ap.add_argument("--plot", help="write a PNG to this path as well")
    args = ap.parse_args(argv)

    records = load_dataset(args.data) if args.data else builtin_dataset()
    result = fit_dataset(records, Length(args.zeta0))
    omega0 = AngularFrequency(2.0 * math.pi * 1e6)

    rows = []
    for rec in records:
        rows.append(["data", rec.source, f"{rec.d.value:.6e}", f"{rec.s_e_rescaled.value:.6e}"])

    d_grid = np.geomspace(*D_RANGE, args.n)
    curves = {}
    for mult in ZETA_MULTIPLES:
        model = SurfacePatchModel(
            zeta=Length(mult * args.zeta0), nsv=result.nsv, omega0=omega0
        )
        s_e = np.array([noise_density(model, d).value for d in d_grid])
        curves[mult] = s_e
        label = f"zeta={mult:g}x"
        for d, v in zip(d_grid, s_e):
            rows.append(["model", label, f"{d:.6e}", f"{v:.6e}"])

    ctx = open(args.output, "w", newline="") if args.output else contextlib.nullcontext(sys.stdout)
    with ctx as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"# nsv_fit_v2_per_hz={result.nsv.value:.6e}"])
        writer.writerow(["series", "label", "d_m", "s_e_si"])
        writer.writerows(rows)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5.0, 3.8))
        for mult, s_e in curves.items():
            ax.loglog(d_grid * 1e6, s_e, lw=1.0, label=f"zeta = {mult:g} zeta0")
        for rec in records:
            marker = "s" if rec.kind == "cantilever" else "o"
            ax.loglog(rec.d.value * 1e6, rec.s_e_rescaled.value, marker, ms=5, label=rec.source)
        ax.set_xlabel("distance (um)")
        ax.set_ylabel("rescaled field noise density (V^2 m^-2 Hz^-1)")
        ax.legend(frameon=False, fontsize=7)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=160)
        print(f"plot written to {args.plot}", file=sys.stderr)

    return 0


if __name__ == "__main__":
    raise SystemExit(main())
