"""Command-line front end.

Five subcommands: ``curve`` samples the model, ``mc`` runs the random-
surface oracle, ``fit`` fits published data, ``rescale`` and ``rates``
wrap the single-record conversions. Everything emits plot-ready CSV (or
JSON with ``--format json``) rather than rendered images; floats are
written in shortest round-trip form so outputs diff cleanly.

Exit codes: 0 on success, 1 when a dataset is empty or produces no
result, 2 for usage and validation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import experiments, montecarlo, spectrum
from .quantities import CONSTANTS, AngularFrequency, validate_model

__all__ = ["main"]

_REFERENCE_ZETAS = (0.65, 1.6, 4.6)  # in units of zeta0, for the fit curves


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _workers() -> int:
    raw = os.environ.get("PATCHNOISE_THREADS", "").strip()
    if not raw:
        return -1
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"PATCHNOISE_THREADS must be an integer, got {raw!r}")
    return n if n > 0 else -1


class _Output:
    """Collects comment lines, sections of rows, or a JSON document."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.comments: list[str] = []
        self.sections: list[tuple[list[str], list[list]]] = []
        self.doc: dict = {}

    def comment(self, text: str) -> None:
        self.comments.append(text)

    def section(self, header: list[str], rows: list[list]) -> None:
        self.sections.append((header, rows))

    def render(self) -> str:
        if self.fmt == "json":
            return json.dumps(self.doc, indent=2) + "\n"
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        writer = csv.writer(buf, lineterminator="\n")
        for i, (header, rows) in enumerate(self.sections):
            if i > 0:
                buf.write("\n")
            writer.writerow(header)
            writer.writerows([_fmt(v) for v in row] for row in rows)
        return buf.getvalue()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _merge_config(args: argparse.Namespace, skip=("config", "command")) -> None:
    """Fill still-unset options from the JSON config file; flags win."""
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in skip:
            continue
        if not hasattr(args, dest):
            raise ValueError(f"config key {key!r} is not an option of this command")
        if getattr(args, dest) is None:
            setattr(args, dest, value)


def _resolve_seed(raw) -> tuple[int, bool]:
    """The explicit seed, or a fresh one when 'auto' was requested."""
    if isinstance(raw, str) and raw.lower() == "auto":
        seed = int(np.random.SeedSequence().entropy) % 2**63
        return seed, True
    return int(raw), False


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchnoise",
        description="Field noise above a conductor with correlated patch potentials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--output", default=None, help="file path, or - for stdout")
        p.add_argument("--config", default=None, help="JSON file with option defaults")

    p = sub.add_parser("curve", help="sample the model noise curve")
    common(p)
    p.add_argument("--zeta", type=float, default=None, help="correlation length, m")
    p.add_argument("--nsv", type=float, default=None, help="amplitude, V^2/Hz")
    p.add_argument("--f0", type=float, default=None, help="reference frequency, Hz")
    p.add_argument("--f", type=float, default=None, help="evaluation frequency, Hz")
    p.add_argument("--alpha", type=float, default=None, help="frequency exponent")
    p.add_argument("--dmin", type=float, default=None, help="smallest height, m")
    p.add_argument("--dmax", type=float, default=None, help="largest height, m")
    p.add_argument("--n", type=int, default=None, help="number of points (>= 2)")
    p.add_argument("--normalized", action="store_true", default=None)
    p.add_argument("--dmin-rho", type=float, default=None, help="smallest d/zeta")
    p.add_argument("--dmax-rho", type=float, default=None, help="largest d/zeta")

    p = sub.add_parser("mc", help="random-surface oracle run")
    common(p)
    p.add_argument("--lam", type=float, default=None, help="seed intensity, 1/m^2")
    p.add_argument("--sigma-v", type=float, default=None, help="patch potential std, V")
    p.add_argument("--side", type=float, default=None, help="box side, m")
    p.add_argument("--grid-n", type=int, default=None, help="grid points per side")
    p.add_argument(
        "--heights", default=None, help="comma-separated heights in m (default: auto)"
    )
    p.add_argument("--configs", type=int, default=None)
    p.add_argument("--seed", default=None, help="64-bit integer, or 'auto'")
    p.add_argument("--export-tessellation", default=None, help="JSON path")
    p.add_argument("--export-correlation", default=None, help="CSV path for C(r)")

    p = sub.add_parser("fit", help="fit amplitude and correlation lengths to data")
    common(p)
    p.add_argument("--data", default=None, help="CSV dataset path")
    p.add_argument(
        "--builtin", action="store_true", default=None, help="use the bundled dataset"
    )
    p.add_argument("--zeta0", type=float, default=None, help="assumed patch size, m")
    p.add_argument(
        "--curves",
        action="store_true",
        default=None,
        help="also emit model curves at the three reference correlation lengths",
    )

    p = sub.add_parser("rescale", help="move a density to the reference frequency")
    common(p)
    p.add_argument("--se", type=float, default=None, help="measured S_E, V^2 m^-2/Hz")
    p.add_argument("--f", type=float, default=None, help="measurement frequency, Hz")
    p.add_argument("--f0", type=float, default=None, help="target frequency, Hz")
    p.add_argument("--alpha", type=float, default=None)

    p = sub.add_parser("rates", help="convert S_E to a probe rate")
    common(p)
    p.add_argument("kind", choices=("ion", "cantilever"))
    p.add_argument("--se", type=float, default=None, help="S_E, V^2 m^-2/Hz")
    p.add_argument("--mass-u", type=float, default=None, help="ion mass, u")
    p.add_argument("--f", type=float, default=None, help="ion secular frequency, Hz")
    p.add_argument("--charge", type=int, default=None, help="ion charge multiple")
    p.add_argument("--q-e", type=float, default=None, help="tip charge in units of e")
    p.add_argument("--temp", type=float, default=None, help="temperature, K")
    p.add_argument("--fc", type=float, default=None, help="resonance, Hz")

    return parser


def _require(args, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValueError(
            "missing required option(s): " + ", ".join(f"--{n}" for n in missing)
        )


def _cmd_curve(args) -> int:
    fmt = args.format or "csv"
    out = _Output(fmt)
    if args.normalized:
        rho_min = args.dmin_rho if args.dmin_rho is not None else 1e-2
        rho_max = args.dmax_rho if args.dmax_rho is not None else 1e2
        n = args.n if args.n is not None else 200
        points = spectrum.scaling_curve(rho_min, rho_max, n)
        out.comment("normalized noise curve: s = S_E zeta^2 / nsv at rho = d / zeta")
        out.section(["rho", "s"], [[p.rho, p.s] for p in points])
        out.doc = {"points": [{"rho": p.rho, "s": p.s} for p in points]}
    else:
        _require(args, ["zeta", "nsv", "dmin", "dmax"])
        n = args.n if args.n is not None else 200
        f0 = args.f0 if args.f0 is not None else experiments.F0_HERTZ
        f = args.f if args.f is not None else f0
        alpha = args.alpha if args.alpha is not None else 1.0
        model = validate_model(
            args.zeta, args.nsv, AngularFrequency.from_hertz(f0), alpha
        )
        curve = spectrum.sample_curve(
            model, args.dmin, args.dmax, n, AngularFrequency.from_hertz(f)
        )
        out.comment(
            f"model: zeta={model.zeta.value!r} m nsv={model.nsv.value!r} V^2/Hz "
            f"f0={f0!r} Hz alpha={model.alpha!r}, evaluated at f={f!r} Hz"
        )
        out.section(["d_m", "s_e_si"], [[d, s] for d, s in curve])
        out.doc = {
            "model": model.to_dict(),
            "f_hz": f,
            "points": [{"d_m": d, "s_e_si": s} for d, s in curve],
        }
    _write(out.render(), args.output)
    return 0


def _auto_heights(spec, grid_n: int, seed: int, workers: int) -> np.ndarray:
    """Pick heights spanning the slope transition, via a small pre-pass."""
    pre = montecarlo.generate_tessellation(spec, grid_n, workers=workers)
    est = montecarlo.field_variance(
        pre, [spec.side / 8.0], configs=8, seed=seed ^ 0x9E3779B97F4A7C15,
        collect_correlation=True, workers=workers,
    ).correlation
    if est is None or est.degenerate:
        raise ValueError("correlation pre-pass failed; pass --heights explicitly")
    z = est.zeta_eff.value
    lo = max(0.3 * z, spec.side / grid_n)
    hi = min(10.0 * z, spec.side / 8.0)
    if not lo < hi:
        raise ValueError("box cannot host the default height range; pass --heights")
    return np.geomspace(lo, hi, 12)


def _cmd_mc(args) -> int:
    fmt = args.format or "csv"
    if args.seed is None:
        raise ValueError("stochastic run requires --seed (an integer, or 'auto')")
    seed, auto = _resolve_seed(args.seed)
    if auto:
        print(f"seed: {seed}", file=sys.stderr)
    side = args.side if args.side is not None else 1.0
    lam = args.lam if args.lam is not None else 400.0
    sigma_v = args.sigma_v if args.sigma_v is not None else 1.0
    grid_n = args.grid_n if args.grid_n is not None else 512
    configs = args.configs if args.configs is not None else 40
    if configs < 1:
        raise ValueError(f"--configs must be >= 1, got {configs}")
    workers = _workers()

    spec = montecarlo.TessellationSpec(
        side=side, intensity=lam, sigma_v=sigma_v, seed=seed
    )
    spec.require_good_statistics()
    template = montecarlo.generate_tessellation(spec, grid_n, workers=workers)

    if args.heights:
        if isinstance(args.heights, (list, tuple)):
            heights = np.array([float(h) for h in args.heights])
        else:
            heights = np.array([float(h) for h in str(args.heights).split(",")])
    else:
        heights = _auto_heights(spec, grid_n, seed, workers)

    profile = montecarlo.field_variance(
        template, heights, configs=configs, seed=seed,
        collect_correlation=True, workers=workers,
    )
    est = profile.correlation
    zeta_eff = est.zeta_eff.value if not est.degenerate else float("nan")
    prediction = (
        montecarlo.analytic_variance(zeta_eff, sigma_v, heights)
        if not est.degenerate
        else np.full(heights.size, np.nan)
    )

    out = _Output(fmt)
    out.comment(f"seed={seed} configs={configs} grid_n={grid_n} side={side!r} m")
    out.comment(
        f"intensity={lam!r} m^-2 sigma_v={sigma_v!r} V "
        f"expected_cells={spec.expected_cells!r}"
    )
    out.comment(
        f"correlation fit: zeta_eff={zeta_eff!r} m amplitude={est.amplitude!r} V^2 "
        f"residual={est.residual!r} degenerate={est.degenerate}"
    )
    rows = [
        [
            float(h),
            float(v),
            float(se),
            float(p),
            flag or "",
        ]
        for h, v, se, p, flag in zip(
            heights, profile.var_e, profile.stderr, prediction, profile.flags
        )
    ]
    out.section(["d_m", "var_e_si", "stderr", "prediction_si", "flag"], rows)
    out.doc = {
        "seed": seed,
        "configs": configs,
        "grid_n": grid_n,
        "side_m": side,
        "intensity_per_m2": lam,
        "sigma_v": sigma_v,
        "zeta_eff_m": zeta_eff,
        "correlation_residual": est.residual,
        "profile": [
            {
                "d_m": float(h),
                "var_e_si": float(v),
                "stderr": float(se),
                "prediction_si": float(p),
                "flag": flag,
            }
            for h, v, se, p, flag in zip(
                heights, profile.var_e, profile.stderr, prediction, profile.flags
            )
        ],
    }
    _write(out.render(), args.output)

    if args.export_tessellation:
        tess = {
            "side_m": side,
            "grid_n": grid_n,
            "seeds_xz_m": np.asarray(template.seeds).tolist(),
            "potentials_v": np.asarray(template.potentials).tolist(),
        }
        with open(args.export_tessellation, "w", encoding="utf-8", newline="") as fh:
            json.dump(tess, fh)
            fh.write("\n")
    if args.export_correlation:
        text = "r_m,c_v2\n" + "\n".join(
            f"{_fmt(float(r))},{_fmt(float(c))}"
            for r, c in zip(est.radii, est.c_values)
        )
        _write(text + "\n", args.export_correlation)
    return 0


def _cmd_fit(args) -> int:
    fmt = args.format or "csv"
    if bool(args.data) == bool(args.builtin):
        raise ValueError("pass exactly one of --data PATH or --builtin")
    records = (
        experiments.builtin_dataset() if args.builtin else experiments.load_dataset(args.data)
    )
    if not records:
        return _fail("dataset is empty", 1)
    zeta0 = args.zeta0 if args.zeta0 is not None else experiments.ZETA0_DEFAULT.value
    result = experiments.fit_dataset(records, zeta0)

    out = _Output(fmt)
    out.comment(f"nsv={result.nsv.value!r} V^2/Hz (zeta0={zeta0!r} m)")
    out.comment(f"amplitude anchored on record {result.anchor.source!r}")
    header = ["source", "kind", "d_um", "f_MHz", "s_e_si", "s_e_rescaled_si",
              "zeta_um", "zeta_over_zeta0", "flags"]
    anchor = result.anchor
    rows = [
        [
            anchor.source,
            anchor.kind,
            anchor.d.value / 1e-6,
            anchor.frequency_hz / 1e6,
            anchor.s_e_measured.value,
            anchor.s_e_rescaled.value,
            float("nan"),
            float("nan"),
            "amplitude-anchor",
        ]
    ]
    for fit, resid in zip(result.zeta_fits, result.residuals):
        rec = fit.record
        zeta_um = fit.zeta.value / 1e-6 if fit.converged else float("nan")
        rows.append(
            [
                rec.source,
                rec.kind,
                rec.d.value / 1e-6,
                rec.frequency_hz / 1e6,
                rec.s_e_measured.value,
                rec.s_e_rescaled.value,
                zeta_um,
                zeta_um * 1e-6 / zeta0 if fit.converged else float("nan"),
                ";".join(fit.flags) if fit.flags else "",
            ]
        )
    out.section(header, rows)
    doc_records = [
        {
            "source": row[0],
            "kind": row[1],
            "d_um": row[2],
            "f_MHz": row[3],
            "s_e_si": row[4],
            "s_e_rescaled_si": row[5],
            "zeta_um": row[6],
            "zeta_over_zeta0": row[7],
            "flags": row[8].split(";") if row[8] else [],
        }
        for row in rows
    ]
    out.doc = {
        "nsv_v2_per_hz": result.nsv.value,
        "zeta0_m": zeta0,
        "anchor": result.anchor.source,
        "records": doc_records,
    }

    if args.curves:
        f0 = AngularFrequency.from_hertz(experiments.F0_HERTZ)
        curve_rows = []
        d_grid = np.geomspace(7.5e-6, 750e-6, 61)
        for mult in _REFERENCE_ZETAS:
            model = validate_model(mult * zeta0, result.nsv.value, f0)
            for d in d_grid:
                s = spectrum.noise_density(model, float(d)).value
                curve_rows.append([mult, float(d), s])
        out.section(["zeta_over_zeta0", "d_m", "s_e_si"], curve_rows)
        out.doc["curves"] = [
            {"zeta_over_zeta0": r[0], "d_m": r[1], "s_e_si": r[2]} for r in curve_rows
        ]

    _write(out.render(), args.output)
    return 0


def _cmd_rescale(args) -> int:
    _require(args, ["se", "f"])
    f0 = args.f0 if args.f0 is not None else experiments.F0_HERTZ
    alpha = args.alpha if args.alpha is not None else 1.0
    value = experiments.rescale_density(args.se, args.f, f0, alpha)
    if (args.format or "csv") == "json":
        _write(json.dumps({"s_e_rescaled_si": value}) + "\n", args.output)
    else:
        _write(_fmt(value) + "\n", args.output)
    return 0


def _cmd_rates(args) -> int:
    if args.kind == "ion":
        _require(args, ["se", "mass-u", "f"])
        charge = args.charge if args.charge is not None else 1
        ion = experiments.IonSpecies.from_amu(args.mass_u, args.f, charge)
        gamma = experiments.heating_rate(args.se, ion)
        key = "heating_rate_per_s"
    else:
        _require(args, ["se", "q-e", "temp"])
        fc = args.fc if args.fc is not None else 1.0e3
        probe = experiments.CantileverProbe(
            charge_c=args.q_e * CONSTANTS.elementary_charge,
            temperature_k=args.temp,
            omega_c=2.0 * math.pi * fc,
        )
        gamma = experiments.damping_rate(args.se, probe)
        key = "damping_rate_per_s"
    if (args.format or "csv") == "json":
        _write(json.dumps({key: gamma}) + "\n", args.output)
    else:
        _write(_fmt(gamma) + "\n", args.output)
    return 0


_HANDLERS = {
    "curve": _cmd_curve,
    "mc": _cmd_mc,
    "fit": _cmd_fit,
    "rescale": _cmd_rescale,
    "rates": _cmd_rates,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        _merge_config(args)
        return _HANDLERS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
