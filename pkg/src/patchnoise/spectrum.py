"""Field-noise spectral density above a surface with correlated patch potentials.

The model: the boundary potential is a stationary random field with an
exponential two-point correlation of length zeta and an amplitude (patch
density times single-patch voltage noise) nsv. Propagating that field
through the half-space kernel and integrating over planar wavenumber
gives the noise density a distance d above the surface,

    S_E(omega, d) = nsv(omega) / zeta^2 * s(d / zeta),

where ``s`` is the dimensionless scaling function computed here by
semi-infinite quadrature. Two closed-form regimes bracket it: far above
the surface (d >> zeta) the density falls as the fourth power of
distance, close in (d << zeta) only as the first power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import j0, j1, jn_zeros

from .quantities import (
    AngularFrequency,
    FieldNoiseDensity,
    Length,
    SurfacePatchModel,
    as_angular_frequency,
    as_meters,
)

__all__ = [
    "QuadratureError",
    "SurfacePatchModel",
    "ScalingPoint",
    "NoiseCurve",
    "ASYMPTOTE_CROSSING_RHO",
    "s_zeta",
    "scaling_function",
    "noise_density",
    "noise_density_direct",
    "asymptotic_long",
    "asymptotic_short",
    "gradient_hankel_components",
    "sample_curve",
    "scaling_curve",
]


class QuadratureError(RuntimeError):
    """A numerical integral failed to converge to the requested accuracy."""


# Where the two asymptotes 1/rho and 3/(4 rho^4) intersect.
ASYMPTOTE_CROSSING_RHO = 0.75 ** (1.0 / 3.0)


def s_zeta(k, zeta: Length | float):
    """Planar power spectrum of the exponential boundary correlation.

    The two-dimensional Fourier transform of exp(-r / zeta) is
    ``2 pi zeta^2 / (1 + zeta^2 k^2)^(3/2)``. Accepts scalar or array k
    (rad/m, non-negative); returns m^2.
    """
    z = as_meters(zeta)
    karr = np.asarray(k, dtype=float)
    if np.any(karr < 0):
        raise ValueError("wavenumber k must be >= 0")
    out = 2.0 * np.pi * z * z * (1.0 + (z * karr) ** 2) ** -1.5
    return out if out.ndim else float(out)


_LAGUERRE_ORDERS = (16, 32, 64, 128)
_laguerre_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _laguerre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _laguerre_cache:
        _laguerre_cache[n] = np.polynomial.laguerre.laggauss(n)
    return _laguerre_cache[n]


def _scaling_laguerre(rho: float, n: int) -> float:
    # After t = 2 kappa the weight becomes exactly exp(-t):
    #   integral = (1/16) * sum w_i t_i^3 (rho^2 + t_i^2 / 4)^(-3/2)
    t, w = _laguerre_rule(n)
    vals = t**3 * (rho * rho + 0.25 * t * t) ** -1.5
    return (2.0 / rho) * float(np.dot(w, vals)) / 16.0


def _scaling_kronrod(rho: float) -> float:
    def integrand(kappa: float) -> float:
        return kappa**3 * math.exp(-2.0 * kappa) * (rho * rho + kappa * kappa) ** -1.5

    # Beyond kappa = 40 the integrand is below 1e-16 of its peak.
    pts = sorted({min(rho, 40.0), min(2.0 * rho, 40.0), min(10.0 * rho, 40.0)})
    val, err = quad(
        integrand, 0.0, 40.0, points=pts, limit=200, epsabs=0.0, epsrel=1e-12
    )
    if not math.isfinite(val) or val <= 0.0 or err > 1e-8 * abs(val):
        raise QuadratureError(
            f"scaling-function quadrature did not converge at rho={rho!r} "
            f"(value {val!r}, error estimate {err!r})"
        )
    return (2.0 / rho) * val


def scaling_function(rho: float) -> float:
    """Dimensionless noise density s(rho) at normalized height rho = d / zeta.

    ``s(rho) = (2 / rho) * integral_0^inf kappa^3 e^(-2 kappa)
    (rho^2 + kappa^2)^(-3/2) d kappa``. Gauss-Laguerre in the transformed
    variable, order doubled until two successive values agree to 1e-10
    relative; if the ladder stalls (it does for rho well below 1, where
    the non-exponential factor is sharply peaked) an adaptive rule on the
    truncated range takes over. Raises QuadratureError rather than
    returning a silently inaccurate value.
    """
    rho = float(rho)
    if not math.isfinite(rho) or rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho!r}")
    prev = None
    for n in _LAGUERRE_ORDERS:
        cur = _scaling_laguerre(rho, n)
        if prev is not None and abs(cur - prev) <= 1e-10 * abs(cur):
            return cur
        prev = cur
    return _scaling_kronrod(rho)


def _amplitude_at(model: SurfacePatchModel, omega: AngularFrequency | float | None) -> float:
    """nsv rescaled from the model's reference frequency to omega."""
    if omega is None:
        return model.nsv.value
    w = as_angular_frequency(omega)
    return model.nsv.value * (model.omega0.value / w) ** model.alpha


def noise_density(
    model: SurfacePatchModel,
    d: Length | float,
    omega: AngularFrequency | float | None = None,
) -> FieldNoiseDensity:
    """Field-noise spectral density at height d and angular frequency omega.

    ``omega=None`` evaluates at the model's reference frequency.
    """
    dd = as_meters(d)
    z = model.zeta.value
    amp = _amplitude_at(model, omega)
    if amp == 0.0:
        return FieldNoiseDensity(0.0)
    return FieldNoiseDensity(amp / (z * z) * scaling_function(dd / z))


def asymptotic_long(
    model: SurfacePatchModel,
    d: Length | float,
    omega: AngularFrequency | float | None = None,
) -> FieldNoiseDensity:
    """Far-field closed form, (3/4) nsv zeta^2 / d^4. Valid for d >> zeta."""
    dd = as_meters(d)
    z = model.zeta.value
    return FieldNoiseDensity(0.75 * _amplitude_at(model, omega) * z * z / dd**4)


def asymptotic_short(
    model: SurfacePatchModel,
    d: Length | float,
    omega: AngularFrequency | float | None = None,
) -> FieldNoiseDensity:
    """Near-field closed form, nsv / (d zeta). Valid for d << zeta."""
    dd = as_meters(d)
    return FieldNoiseDensity(_amplitude_at(model, omega) / (dd * model.zeta.value))


def noise_density_direct(
    model: SurfacePatchModel,
    d: Length | float,
    omega: AngularFrequency | float | None = None,
    spectrum_fn=None,
    k_max: float | None = None,
    quad_points=None,
) -> FieldNoiseDensity:
    """Noise density by direct wavenumber quadrature, without normalizing.

    Evaluates ``amp / pi * integral_0^inf S(k) k^3 exp(-2 d k) dk`` with
    dimensional k, where S defaults to the exponential-correlation
    spectrum :func:`s_zeta`. Algebraically identical to
    :func:`noise_density` after substituting kappa = k d, so the two
    serve as an internal consistency cross-check.

    ``spectrum_fn`` swaps in an arbitrary boundary spectrum S(k) -> m^2;
    pass ``quad_points`` (wavenumbers where S has structure) if it is
    sharply localized, and ``k_max`` to override the integration cutoff.
    """
    dd = as_meters(d)
    amp = _amplitude_at(model, omega)
    if amp == 0.0:
        return FieldNoiseDensity(0.0)
    z = model.zeta.value
    spectrum = spectrum_fn if spectrum_fn is not None else (lambda k: s_zeta(k, z))
    cutoff = float(k_max) if k_max is not None else 20.0 / dd

    def integrand(k: float) -> float:
        return float(spectrum(k)) * k**3 * math.exp(-2.0 * dd * k)

    if quad_points is None:
        pts = sorted({min(1.0 / z, cutoff), min(0.5 / dd, cutoff), min(1.0 / dd, cutoff)})
    else:
        pts = sorted(p for p in quad_points if 0.0 < p < cutoff)
    val, err = quad(
        integrand, 0.0, cutoff, points=pts or None, limit=300, epsabs=0.0, epsrel=1e-10
    )
    if not math.isfinite(val) or (val != 0.0 and err > 1e-7 * abs(val)):
        raise QuadratureError(
            f"wavenumber quadrature did not converge at d={dd!r} "
            f"(value {val!r}, error estimate {err!r})"
        )
    return FieldNoiseDensity(amp * val / math.pi)


_GL32_NODES, _GL32_WEIGHTS = leggauss(32)


def _bessel_tail_sum(f, bessel, zeros: np.ndarray) -> float:
    """Sum of f(u)*J(u) over consecutive inter-zero segments, Euler-accelerated.

    The segment integrals alternate in sign once f is slowly varying, so
    repeated averaging of the partial sums converges far faster than the
    raw series.
    """
    mid = 0.5 * (zeros[:-1] + zeros[1:])
    half = 0.5 * (zeros[1:] - zeros[:-1])
    u = mid[:, None] + half[:, None] * _GL32_NODES[None, :]
    seg = (f(u) * bessel(u) * _GL32_WEIGHTS[None, :]).sum(axis=1) * half
    partial = np.cumsum(seg)
    while partial.size > 1:
        partial = 0.5 * (partial[:-1] + partial[1:])
    return float(partial[0])


def _bessel_integral(f, nu: int, a: float, nzeros: int) -> float:
    """integral_0^inf f(u) J_nu(a u) du for smooth, decaying f."""
    bessel = (lambda u: j0(a * u)) if nu == 0 else (lambda u: j1(a * u))
    zeros = jn_zeros(nu, nzeros) / a
    head, _ = quad(
        lambda u: f(u) * bessel(u), 0.0, zeros[0], limit=200, epsabs=1e-14, epsrel=1e-12
    )
    return head + _bessel_tail_sum(f, bessel, zeros)


def gradient_hankel_components(k: float, d: Length | float) -> np.ndarray:
    """Radial Bessel integrals of the kernel gradient at wavenumber k, height d.

    Writing a = d k, the planar Fourier transform of the kernel gradient
    separates into two independent radial integrals,

        H(a)  = 3 * integral u^2 (1 + u^2)^(-5/2) J1(a u) du
        Vt(a) =     integral u (u^2 - 2) (1 + u^2)^(-5/2) J0(a u) du,

    returned as the component vector (H, Vt, H) matching the (x, y, z)
    structure. Both reduce to elementary closed forms (a e^-a and
    -a e^-a); this routine computes them by oscillatory quadrature so it
    can serve as an independent check of that reduction.
    """
    dd = as_meters(d)
    k = float(k)
    if k < 0.0:
        raise ValueError(f"wavenumber k must be >= 0, got {k!r}")
    a = dd * k
    if a == 0.0:
        # J1(0) = 0 kills H; the Vt integrand integrates to zero exactly.
        return np.zeros(3)

    def f_h(u):
        return 3.0 * u**2 * (1.0 + u**2) ** -2.5

    def f_v(u):
        return u * (u**2 - 2.0) * (1.0 + u**2) ** -2.5

    h_val = _bessel_integral(f_h, 1, a, 40)
    v_val = _bessel_integral(f_v, 0, a, 40)
    h_chk = _bessel_integral(f_h, 1, a, 28)
    v_chk = _bessel_integral(f_v, 0, a, 28)
    scale = max(abs(h_val), abs(v_val), 1e-300)
    if max(abs(h_val - h_chk), abs(v_val - v_chk)) > 1e-9 * scale:
        raise QuadratureError(
            f"oscillatory Bessel quadrature did not stabilize at a={a!r}"
        )
    return np.array([h_val, v_val, h_val])


@dataclass(frozen=True)
class ScalingPoint:
    """One point (rho, s) of the normalized noise curve.

    Carries its own sanity bound: the exact curve lies strictly under
    both asymptotes, so s must sit in (0, min(1/rho, 3/(4 rho^4))], with
    a 1e-9 relative allowance because the near bound is approached as
    rho -> 0.
    """

    rho: float
    s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ValueError(f"rho must be > 0, got {self.rho!r}")
        bound = min(1.0 / self.rho, 0.75 / self.rho**4)
        if not (0.0 < self.s < bound * (1.0 + 1e-9)):
            raise ValueError(
                f"s={self.s!r} violates 0 < s < min(1/rho, 3/(4 rho^4)) at rho={self.rho!r}"
            )


@dataclass(frozen=True)
class NoiseCurve:
    """Sampled (d, S_E) pairs from one model, heights strictly increasing."""

    d_m: np.ndarray
    s_e: np.ndarray
    model: SurfacePatchModel
    omega: float = field(default=0.0)  # rad/s; 0 means the model's omega0

    def __post_init__(self) -> None:
        d = np.asarray(self.d_m, dtype=float)
        s = np.asarray(self.s_e, dtype=float)
        if d.ndim != 1 or d.shape != s.shape or d.size < 2:
            raise ValueError("need matching 1D arrays with at least two points")
        if not np.all(np.diff(d) > 0.0):
            raise ValueError("heights must be strictly increasing")
        if not np.all(np.diff(s) < 0.0):
            raise ValueError("noise densities must be strictly decreasing")
        for name, arr in (("d_m", d), ("s_e", s)):
            ro = arr.copy()
            ro.flags.writeable = False
            object.__setattr__(self, name, ro)

    def __len__(self) -> int:
        return int(self.d_m.size)

    def __iter__(self):
        return iter(zip(self.d_m.tolist(), self.s_e.tolist()))


def sample_curve(
    model: SurfacePatchModel,
    d_min: Length | float,
    d_max: Length | float,
    n: int,
    omega: AngularFrequency | float | None = None,
) -> NoiseCurve:
    """Evaluate the model on n log-spaced heights in [d_min, d_max]."""
    lo, hi = as_meters(d_min), as_meters(d_max)
    if not lo < hi:
        raise ValueError(f"need d_min < d_max, got {lo!r} >= {hi!r}")
    n = int(n)
    if n < 2:
        raise ValueError(f"need at least two sample points, got {n!r}")
    d = np.geomspace(lo, hi, n)
    s = np.array([noise_density(model, di, omega).value for di in d])
    w = as_angular_frequency(omega) if omega is not None else model.omega0.value
    return NoiseCurve(d_m=d, s_e=s, model=model, omega=w)


def scaling_curve(rho_min: float, rho_max: float, n: int) -> list[ScalingPoint]:
    """The normalized curve s(rho) on n log-spaced points."""
    if not 0.0 < float(rho_min) < float(rho_max):
        raise ValueError("need 0 < rho_min < rho_max")
    if int(n) < 2:
        raise ValueError("need at least two sample points")
    rhos = np.geomspace(float(rho_min), float(rho_max), int(n))
    return [ScalingPoint(rho=float(r), s=scaling_function(float(r))) for r in rhos]
