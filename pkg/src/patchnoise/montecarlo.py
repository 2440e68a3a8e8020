"""Brute-force oracle for the patch-noise model.

Nothing here assumes the closed-form results: surfaces are generated as
Voronoi tessellations of a planar Poisson point process, each cell gets
an independent random potential, and the field statistics a height d
above the plane are measured from the propagated grids. Comparing those
measurements against the analytic scaling function is the package's main
internal validation loop.

All randomness flows through counter-based Philox streams keyed by the
caller's seed, with one fixed counter block per configuration index, so
ensembles are reproducible bit for bit and safe to parallelize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import welch
from scipy.spatial import cKDTree

from .kernel import BoundaryGrid, field_at, field_multipliers
from .quantities import Length, as_meters
from .spectrum import scaling_function

__all__ = [
    "TessellationSpec",
    "PatchTessellation",
    "CorrelationEstimate",
    "VarianceProfile",
    "FactorizationReport",
    "generate_tessellation",
    "boundary_correlation",
    "average_correlations",
    "fit_exponential_correlation",
    "field_variance",
    "analytic_variance",
    "temporal_factorization_check",
    "loglog_slope",
]


@dataclass(frozen=True)
class TessellationSpec:
    """Parameters of one random patch surface.

    ``side`` is the edge length of the periodic square region (m),
    ``intensity`` the Poisson density of cell seeds (1/m^2), ``sigma_v``
    the standard deviation of the per-cell potentials (V). Sound
    statistics want an expected cell count ``intensity * side**2`` of at
    least 100; deliberately degenerate cases (a single cell) are allowed
    for testing, so that floor is checked by
    :meth:`require_good_statistics`, not the constructor.
    """

    side: float
    intensity: float
    sigma_v: float
    seed: int

    def __post_init__(self) -> None:
        s = float(self.side)
        lam = float(self.intensity)
        sv = float(self.sigma_v)
        if not (math.isfinite(s) and s > 0.0):
            raise ValueError(f"side must be > 0 m, got {s!r}")
        if not (math.isfinite(lam) and lam > 0.0):
            raise ValueError(f"intensity must be > 0 m^-2, got {lam!r}")
        if not (math.isfinite(sv) and sv >= 0.0):
            raise ValueError(f"sigma_v must be >= 0 V, got {sv!r}")
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {seed!r}")
        object.__setattr__(self, "side", s)
        object.__setattr__(self, "intensity", lam)
        object.__setattr__(self, "sigma_v", sv)
        object.__setattr__(self, "seed", seed)

    @property
    def expected_cells(self) -> float:
        return self.intensity * self.side**2

    def require_good_statistics(self) -> None:
        if self.expected_cells < 100.0:
            raise ValueError(
                f"expected cell count {self.expected_cells:.3g} < 100; "
                f"raise intensity or side for meaningful statistics"
            )


@dataclass(frozen=True)
class PatchTessellation:
    """One realized surface: seeds, the cell-id grid, and cell potentials."""

    spec: TessellationSpec
    seeds: np.ndarray
    cell_ids: np.ndarray
    potentials: np.ndarray

    def __post_init__(self) -> None:
        for name in ("seeds", "cell_ids", "potentials"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.cell_ids.ndim != 2:
            raise ValueError("cell_ids must be a 2D grid")
        if self.seeds.shape[0] != self.potentials.shape[0]:
            raise ValueError("one potential per seed required")

    @property
    def n(self) -> int:
        return int(self.cell_ids.shape[0])

    @property
    def spacing(self) -> float:
        return self.spec.side / self.n

    @property
    def num_cells(self) -> int:
        return int(self.seeds.shape[0])

    def boundary_potential(self) -> BoundaryGrid:
        return BoundaryGrid(
            samples=self.potentials[self.cell_ids], spacing=self.spacing
        )


def _config_rng(seed: int, index: int) -> np.random.Generator:
    # One disjoint 2^128-draw counter block per configuration index.
    return np.random.Generator(np.random.Philox(key=seed, counter=index * 2**128))


def _required_spacing(intensity: float) -> float:
    return (1.0 / math.sqrt(intensity)) / 8.0


def _generate_with_rng(
    spec: TessellationSpec, n: int, rng: np.random.Generator, workers: int = -1
) -> PatchTessellation:
    n = int(n)
    if n < 2:
        raise ValueError(f"grid must have at least 2 points per side, got {n!r}")
    spacing = spec.side / n
    needed = _required_spacing(spec.intensity)
    if spacing > needed:
        raise ValueError(
            f"grid spacing {spacing:.6g} m under-resolves the cells: "
            f"need spacing <= {needed:.6g} m "
            f"(at least {math.ceil(spec.side / needed)} points per side)"
        )
    count = int(rng.poisson(spec.expected_cells))
    if count == 0:
        raise ValueError(
            "the Poisson draw produced zero seed points; "
            "increase intensity, side, or try another seed"
        )
    seeds = rng.uniform(0.0, spec.side, size=(count, 2))
    coords = np.arange(n) * spacing
    gx, gz = np.meshgrid(coords, coords, indexing="ij")
    pts = np.column_stack([gx.ravel(), gz.ravel()])
    tree = cKDTree(seeds, boxsize=spec.side)
    _, idx = tree.query(pts, workers=workers)
    cell_ids = idx.reshape(n, n).astype(np.int32)
    potentials = rng.normal(0.0, spec.sigma_v, size=count)
    return PatchTessellation(
        spec=spec, seeds=seeds, cell_ids=cell_ids, potentials=potentials
    )


def generate_tessellation(
    spec: TessellationSpec, n: int, workers: int = -1
) -> PatchTessellation:
    """Realize the Poisson-Voronoi surface on an n-by-n periodic grid.

    Cell assignment uses the torus metric so the surface matches the
    periodic spectral propagator. Deterministic for a given spec: the
    same seed always yields the same tessellation, bit for bit. The grid
    must resolve the cells (spacing at most an eighth of the mean seed
    separation); a coarser grid is rejected with the required spacing in
    the message.
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    return _generate_with_rng(spec, n, rng, workers=workers)


@dataclass(frozen=True)
class CorrelationEstimate:
    """Radially averaged two-point function of the boundary potential.

    The exponential fit ``amplitude * exp(-r / zeta_eff)`` runs over
    ``r <= fit_max_r``. ``residual`` is the rms misfit over that range
    normalized by C(0). A flat correlation (single-cell surface) or a
    diverging fit is flagged ``degenerate``: ``zeta_eff`` is then None
    and the residual infinite. C estimates from finite surfaces carry
    statistical noise, so monotone decay holds only up to that noise;
    use :meth:`is_monotone` with a tolerance rather than expecting it
    bin by bin.
    """

    radii: np.ndarray
    c_values: np.ndarray
    zeta_eff: Length | None
    amplitude: float
    residual: float
    degenerate: bool
    fit_max_r: float
    n_surfaces: int = 1

    def __post_init__(self) -> None:
        r = np.asarray(self.radii, dtype=float).copy()
        c = np.asarray(self.c_values, dtype=float).copy()
        if r.ndim != 1 or r.shape != c.shape or r.size < 2:
            raise ValueError("radii and c_values must be matching 1D arrays")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(c))):
            raise ValueError("correlation samples must be finite")
        r.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "c_values", c)

    def is_monotone(self, tol_fraction: float = 0.02) -> bool:
        """Non-increasing over the fitted range, within tol_fraction of C(0)."""
        mask = self.radii <= self.fit_max_r
        c = self.c_values[mask]
        scale = abs(c[0]) if c.size else 0.0
        return bool(np.all(np.diff(c) <= tol_fraction * scale))


def fit_exponential_correlation(
    radii: np.ndarray, c_values: np.ndarray, fit_max_r: float
) -> tuple[float | None, float, float]:
    """Least-squares fit of A * exp(-r / zeta) to (radii, c_values).

    Returns (zeta, amplitude, residual); zeta is None with an infinite
    residual when the data cannot constrain a decay length.
    """
    radii = np.asarray(radii, dtype=float)
    c_values = np.asarray(c_values, dtype=float)
    mask = radii <= fit_max_r
    r = radii[mask]
    c = c_values[mask]
    if r.size < 3:
        return None, float("nan"), float("inf")
    c0 = c[0]
    if not np.isfinite(c0) or c0 <= 0.0 or np.std(c) <= 1e-12 * abs(c0):
        return None, float(c0), float("inf")
    try:
        popt, _ = curve_fit(
            lambda rr, amp, zeta: amp * np.exp(-rr / zeta),
            r,
            c,
            p0=(c0, max(fit_max_r / 6.0, r[1])),
            maxfev=10000,
        )
    except RuntimeError:
        return None, float("nan"), float("inf")
    amp, zeta = float(popt[0]), float(popt[1])
    if not (math.isfinite(zeta) and zeta > 0.0 and math.isfinite(amp)):
        return None, amp, float("inf")
    residual = float(
        np.sqrt(np.mean((amp * np.exp(-r / zeta) - c) ** 2)) / abs(c0)
    )
    return zeta, amp, residual


def _radial_bins(n: int, spacing: float):
    """Ring index per grid lag under the torus metric, plus ring radii."""
    idx = np.arange(n)
    off = np.minimum(idx, n - idx) * spacing
    dist = np.hypot(off[:, None], off[None, :])
    ring = np.rint(dist / spacing).astype(np.int64)
    counts = np.bincount(ring.ravel())
    radii = np.arange(counts.size) * spacing
    return ring, counts, radii


def _radial_autocorrelation(power: np.ndarray, n: int, ring, counts) -> np.ndarray:
    # power is |rfft2(phi)|^2; Wiener-Khinchin gives the circular (raw,
    # uncentered) autocorrelation of the boundary potential.
    ac = np.fft.irfft2(power, s=(n, n)) / (n * n)
    sums = np.bincount(ring.ravel(), weights=ac.ravel(), minlength=counts.size)
    return sums / counts


def boundary_correlation(
    t: PatchTessellation, max_r: Length | float | None = None
) -> CorrelationEstimate:
    """Two-point function of one surface's boundary potential, plus its fit.

    Fourier autocorrelation of the potential grid, radially averaged
    under the periodic metric out to ``max_r`` (at most a quarter of the
    box, the default), then fitted with an exponential over
    ``r <= 3 / sqrt(intensity)``. Pools of surfaces average better; see
    :func:`average_correlations`.
    """
    L = t.spec.side
    mr = L / 4.0 if max_r is None else as_meters(max_r)
    if mr > L / 4.0 * (1.0 + 1e-12):
        raise ValueError(
            f"max_r {mr:.6g} m exceeds a quarter of the box ({L / 4.0:.6g} m); "
            f"larger lags alias around the torus"
        )
    n = t.n
    phi = t.boundary_potential().samples
    power = np.abs(np.fft.rfft2(phi)) ** 2
    ring, counts, radii = _radial_bins(n, t.spacing)
    c_all = _radial_autocorrelation(power, n, ring, counts)
    keep = radii <= mr
    radii, c_vals = radii[keep], c_all[keep]
    fit_max_r = min(3.0 / math.sqrt(t.spec.intensity), mr)
    zeta, amp, residual = fit_exponential_correlation(radii, c_vals, fit_max_r)
    return CorrelationEstimate(
        radii=radii,
        c_values=c_vals,
        zeta_eff=Length(zeta) if zeta is not None else None,
        amplitude=amp,
        residual=residual,
        degenerate=zeta is None,
        fit_max_r=fit_max_r,
    )


def average_correlations(estimates) -> CorrelationEstimate:
    """Pool per-surface correlation estimates and refit the average."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("need at least one estimate")
    first = estimates[0]
    for e in estimates[1:]:
        if e.radii.shape != first.radii.shape or not np.array_equal(
            e.radii, first.radii
        ):
            raise ValueError("estimates must share the same radial grid")
    c_mean = np.mean([e.c_values for e in estimates], axis=0)
    zeta, amp, residual = fit_exponential_correlation(
        first.radii, c_mean, first.fit_max_r
    )
    return CorrelationEstimate(
        radii=first.radii,
        c_values=c_mean,
        zeta_eff=Length(zeta) if zeta is not None else None,
        amplitude=amp,
        residual=residual,
        degenerate=zeta is None,
        fit_max_r=first.fit_max_r,
        n_surfaces=sum(e.n_surfaces for e in estimates),
    )


def _rfft2_column_weights(n: int) -> np.ndarray:
    """Multiplicities of rfft2 columns when summing power over the full plane."""
    m = n // 2 + 1
    w = np.full(m, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


@dataclass(frozen=True)
class VarianceProfile:
    """Ensemble field variance against height.

    ``var_e`` is the total Var(Ex) + Var(Ey) + Var(Ez) per height with
    standard errors over configurations; ``var_components`` holds the
    per-component means (rows x, y, z) behind it. Heights that violate
    the resolvable band [grid spacing, side/8] get a message in
    ``flags`` and NaN statistics instead of silently wrong numbers.
    """

    heights: np.ndarray
    var_e: np.ndarray
    stderr: np.ndarray
    var_components: np.ndarray
    stderr_components: np.ndarray
    configs: int
    flags: tuple
    correlation: CorrelationEstimate | None = None

    def __post_init__(self) -> None:
        for name in (
            "heights",
            "var_e",
            "stderr",
            "var_components",
            "stderr_components",
        ):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if len(self.flags) != self.heights.size:
            raise ValueError("one flag entry per height required")


def analytic_variance(zeta_eff: Length | float, sigma_v: float, heights) -> np.ndarray:
    """Model prediction sigma_v^2 * s(d / zeta) / zeta^2 for each height."""
    z = as_meters(zeta_eff)
    hs = np.atleast_1d(np.asarray(heights, dtype=float))
    return np.array(
        [sigma_v**2 * scaling_function(d / z) / (z * z) for d in hs]
    )


def field_variance(
    t: PatchTessellation,
    heights,
    configs: int,
    seed: int,
    collect_correlation: bool = False,
    workers: int = -1,
) -> VarianceProfile:
    """Measure Var(E) at each height over an ensemble of fresh surfaces.

    ``t`` fixes the geometry and the surface statistics (its spec);
    every configuration redraws seeds and potentials from an independent
    counter block of Philox(seed), so the result is a pure function of
    (spec geometry, heights, configs, seed). Variances come from the
    power spectrum of each boundary realization via Parseval, which is
    exactly the spatial variance of the propagated field grids; standard
    errors are over configurations.

    With ``collect_correlation`` the same spectra are reused to
    accumulate the ensemble boundary correlation, saving a second sweep.
    """
    configs = int(configs)
    if configs < 1:
        raise ValueError(f"need configs >= 1, got {configs!r}")
    n = t.n
    spacing = t.spacing
    L = t.spec.side
    hs = np.array([as_meters(h) for h in np.atleast_1d(heights)], dtype=float)
    flags = []
    usable = []
    for d in hs:
        if d < spacing * (1.0 - 1e-12):
            flags.append(f"height {d:.6g} m below grid spacing {spacing:.6g} m")
        elif d > L / 8.0 * (1.0 + 1e-12):
            flags.append(f"height {d:.6g} m above side/8 = {L / 8.0:.6g} m")
        else:
            flags.append(None)
        usable.append(flags[-1] is None)
    usable = np.array(usable)

    wcol = _rfft2_column_weights(n)
    norm = 1.0 / float(n) ** 4
    # |multiplier|^2 tables, one (3, n, n//2+1) block per usable height
    mult2 = []
    for d, ok in zip(hs, usable):
        if not ok:
            mult2.append(None)
            continue
        mx, my, mz = field_multipliers((n, n), spacing, d)
        mult2.append(
            np.stack(
                [
                    (np.abs(mx) ** 2) * wcol,
                    (np.abs(my) ** 2) * wcol,
                    (np.abs(mz) ** 2) * wcol,
                ]
            )
        )

    if collect_correlation:
        ring, counts, radii_all = _radial_bins(n, spacing)
        keep = radii_all <= L / 4.0
        c_accum = np.zeros(int(keep.sum()))

    per_config = np.full((configs, 3, hs.size), np.nan)
    for i in range(configs):
        rng = _config_rng(seed, i)
        surf = _generate_with_rng(t.spec, n, rng, workers=workers)
        power = np.abs(np.fft.rfft2(surf.boundary_potential().samples)) ** 2
        for j, table in enumerate(mult2):
            if table is None:
                continue
            per_config[i, :, j] = (
                np.tensordot(table, power, axes=([1, 2], [0, 1])) * norm
            )
        if collect_correlation:
            c_accum += _radial_autocorrelation(power, n, ring, counts)[keep]

    comp_mean = per_config.mean(axis=0)
    total = per_config.sum(axis=1)
    var_e = total.mean(axis=0)
    if configs > 1:
        stderr = total.std(axis=0, ddof=1) / math.sqrt(configs)
        comp_se = per_config.std(axis=0, ddof=1) / math.sqrt(configs)
    else:
        stderr = np.full(hs.size, np.nan)
        comp_se = np.full((3, hs.size), np.nan)
    var_e = np.where(usable, var_e, np.nan)
    stderr = np.where(usable, stderr, np.nan)

    correlation = None
    if collect_correlation:
        radii = radii_all[keep]
        c_mean = c_accum / configs
        fit_max_r = min(3.0 / math.sqrt(t.spec.intensity), L / 4.0)
        zeta, amp, residual = fit_exponential_correlation(radii, c_mean, fit_max_r)
        correlation = CorrelationEstimate(
            radii=radii,
            c_values=c_mean,
            zeta_eff=Length(zeta) if zeta is not None else None,
            amplitude=amp,
            residual=residual,
            degenerate=zeta is None,
            fit_max_r=fit_max_r,
            n_surfaces=configs,
        )

    return VarianceProfile(
        heights=hs,
        var_e=var_e,
        stderr=stderr,
        var_components=comp_mean,
        stderr_components=comp_se,
        configs=configs,
        flags=tuple(flags),
        correlation=correlation,
    )


@dataclass(frozen=True)
class FactorizationReport:
    """Does the dynamic field noise factor into (static spatial) x S_V?

    ``ratios`` holds S_E(omega) / S_V(omega) at the probe frequencies;
    for a linear static surface map the ratio is exactly flat in omega,
    so ``flatness`` (max relative spread around the median) measures
    only estimator noise. ``cross_correlation`` checks that two distinct
    patches' potential traces are uncorrelated. With ``ou_rate`` = 0 the
    potentials freeze: PSD ratios are then meaningless (``frozen``), but
    the probe fields must equal the static solution exactly.
    """

    omegas: np.ndarray
    ratios: np.ndarray
    flatness: float
    time_variance: float
    static_variance: float
    cross_correlation: float
    cross_corr_threshold: float
    probe_values_initial: np.ndarray
    static_probe_values: np.ndarray
    frozen: bool
    steps: int
    dt: float
    ou_rate: float


def _probe_indices(n: int, per_side: int = 4) -> np.ndarray:
    pos = ((np.arange(per_side) + 0.5) * n / per_side).astype(int)
    return np.array([(i, j) for i in pos for j in pos])


def _probe_weights(
    t: PatchTessellation, d: float, probes: np.ndarray
) -> np.ndarray:
    """g[comp, probe, cell]: field component at a probe per unit cell potential."""
    n = t.n
    mx, my, mz = field_multipliers((n, n), t.spacing, d)
    cells = t.num_cells
    ids = t.cell_ids.ravel()
    g = np.empty((3, len(probes), cells))
    idx = np.arange(n)
    for ci, mult in enumerate((mx, my, mz)):
        impulse = np.fft.irfft2(mult, s=(n, n))
        for pi, (ix, iz) in enumerate(probes):
            shifted = impulse[np.ix_((ix - idx) % n, (iz - idx) % n)]
            g[ci, pi] = np.bincount(ids, weights=shifted.ravel(), minlength=cells)
    return g


def temporal_factorization_check(
    t: PatchTessellation,
    d: Length | float,
    ou_rate: float,
    steps: int,
    dt: float,
    seed: int,
    n_stored_patches: int = 64,
) -> FactorizationReport:
    """Drive each patch with an independent Ornstein-Uhlenbeck voltage.

    The OU update is exact (decay factor e^(-rate dt) with the matching
    innovation variance), so no time-discretization error enters. Field
    traces at a 4x4 probe lattice and a subset of patch-voltage traces
    are Welch-transformed; the report compares their spectral densities
    across frequency and the probe fields against the static solution.
    """
    steps = int(steps)
    dt = float(dt)
    rate = float(ou_rate)
    if rate < 0.0 or not math.isfinite(rate):
        raise ValueError(f"ou_rate must be >= 0, got {rate!r}")
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if dt * rate >= 0.1:
        raise ValueError(
            f"dt * ou_rate = {dt * rate:.3g} too coarse; need < 0.1 to resolve "
            f"the voltage spectrum knee"
        )
    if steps < 2**14:
        raise ValueError(
            f"steps = {steps} gives too little frequency resolution; need >= {2**14}"
        )
    dd = as_meters(d)
    n = t.n
    if not (t.spacing <= dd <= t.spec.side / 8.0):
        raise ValueError(
            f"height {dd:.6g} m outside the resolvable band "
            f"[{t.spacing:.6g}, {t.spec.side / 8.0:.6g}] m"
        )

    probes = _probe_indices(n)
    g = _probe_weights(t, dd, probes)  # (3, P, cells)
    cells = t.num_cells
    sigma = t.spec.sigma_v

    rng = np.random.Generator(np.random.Philox(key=seed))
    decay = math.exp(-rate * dt)
    innov = sigma * math.sqrt(max(0.0, 1.0 - decay * decay))
    v = rng.normal(0.0, sigma, size=cells)
    v0 = v.copy()
    n_keep = min(int(n_stored_patches), cells)
    n_probes = len(probes)
    gmat = g.reshape(3 * n_probes, cells)
    e_traces = np.empty((steps, 3 * n_probes))
    v_traces = np.empty((steps, n_keep))
    for step in range(steps):
        e_traces[step] = gmat @ v
        v_traces[step] = v[:n_keep]
        v = decay * v + innov * rng.normal(size=cells)

    probe_initial = e_traces[0].reshape(3, n_probes)
    # the same initial potentials pushed through the grid solver directly
    static_grid = BoundaryGrid(samples=v0[t.cell_ids], spacing=t.spacing)
    fx, fy, fz = field_at(static_grid, dd)
    static_probe = np.stack(
        [f.samples[probes[:, 0], probes[:, 1]] for f in (fx, fy, fz)]
    )

    # total (three-component) field variance at the probes: measured from
    # the traces, and its exact stationary counterpart sigma^2 sum_i g_i^2
    time_variance = float(
        e_traces.var(axis=0, ddof=1).reshape(3, n_probes).sum(axis=0).mean()
    )
    static_variance = float(
        sigma**2 * (gmat**2).sum(axis=1).reshape(3, n_probes).sum(axis=0).mean()
    )

    frozen = rate == 0.0 or innov == 0.0
    if frozen or sigma == 0.0:
        omegas = np.empty(0)
        ratios = np.empty(0)
        flatness = float("nan")
        cross = 0.0
        threshold = float("inf")
    else:
        nperseg = min(max(steps // 8, 256), 4096)
        fs = 1.0 / dt
        freqs, psd_e = welch(e_traces, fs=fs, nperseg=nperseg, axis=0)
        _, psd_v = welch(v_traces, fs=fs, nperseg=nperseg, axis=0)
        s_e = psd_e.sum(axis=1) / n_probes  # sum components, average probes
        s_v = psd_v.mean(axis=1)
        w_all = 2.0 * np.pi * freqs
        lo = max(rate / 3.0, w_all[1] * 4.0)
        hi = min(rate * 10.0 / 3.0, w_all[-1] / 2.0)
        if not lo < hi:
            raise ValueError(
                "no usable frequency window: adjust dt, steps, or ou_rate"
            )
        omegas = np.geomspace(lo, hi, 6)
        ratios = np.empty(6)
        for i, w in enumerate(omegas):
            band = (w_all >= 0.8 * w) & (w_all <= 1.25 * w)
            ratios[i] = s_e[band].mean() / s_v[band].mean()
        med = float(np.median(ratios))
        flatness = float(np.max(np.abs(ratios / med - 1.0)))
        r01 = np.corrcoef(v_traces[:, 0], v_traces[:, 1])[0, 1] if n_keep > 1 else 0.0
        n_eff = max(steps * dt * rate / 2.0, 1.0)
        cross = float(r01)
        threshold = 3.0 / math.sqrt(n_eff)

    return FactorizationReport(
        omegas=omegas,
        ratios=ratios,
        flatness=flatness,
        time_variance=time_variance,
        static_variance=static_variance,
        cross_correlation=cross,
        cross_corr_threshold=threshold,
        probe_values_initial=probe_initial,
        static_probe_values=static_probe,
        frozen=frozen,
        steps=steps,
        dt=dt,
        ou_rate=rate,
    )


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
