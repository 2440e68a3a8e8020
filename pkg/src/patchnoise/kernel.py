"""Half-space Dirichlet problem above a grounded plane.

The potential above the plane y = 0 is the boundary potential convolved
with ``K(x, y, z) = y / (x^2 + y^2 + z^2)^(3/2)`` divided by 2*pi. In
Fourier space along the plane the convolution collapses to one multiplier
per mode, ``exp(-y*|k|)``, which is what the grid propagator applies.
Fields follow by spectral differentiation.

Grids are periodic in both planar directions. That approximates the
infinite plane by a torus; callers should keep relevant features a few
correlation lengths away from the wrap-around seam and heights well below
the box size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantities import Length, as_meters

__all__ = [
    "KernelPoint",
    "BoundaryGrid",
    "FieldGrid",
    "kernel",
    "kernel_gradient",
    "field_multipliers",
    "propagate_potential",
    "field_at",
]


@dataclass(frozen=True)
class KernelPoint:
    """Observation point relative to a boundary source at the origin.

    ``y`` is the height above the plane and must be positive; the kernel
    diverges on the surface itself and the model never evaluates there.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"KernelPoint.{name} must be finite")
            object.__setattr__(self, name, v)
        if self.y <= 0.0:
            raise ValueError(f"KernelPoint.y must be > 0 (height), got {self.y!r}")


def kernel(p: KernelPoint) -> float:
    """Poisson kernel of the half space, y / r^3. Units 1/m^2."""
    r2 = p.x * p.x + p.y * p.y + p.z * p.z
    return p.y / r2**1.5


def kernel_gradient(p: KernelPoint) -> np.ndarray:
    """Gradient of :func:`kernel` with respect to (x, y, z). Units 1/m^3.

    Closed form: ``(-3xy, r^2 - 3y^2, -3zy) / r^5``.
    """
    r2 = p.x * p.x + p.y * p.y + p.z * p.z
    r5 = r2**2.5
    return np.array(
        [
            -3.0 * p.x * p.y / r5,
            (r2 - 3.0 * p.y * p.y) / r5,
            -3.0 * p.z * p.y / r5,
        ]
    )


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class BoundaryGrid:
    """Potential samples on a uniform periodic (x, z) grid at y = 0.

    ``samples[i, j]`` is the potential in volts at
    ``(x, z) = (i * spacing, j * spacing)``. Both axes wrap around.
    """

    samples: np.ndarray
    spacing: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError(
                f"samples must be a 2D array with at least 2 points per axis, "
                f"got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        h = float(self.spacing)
        if not math.isfinite(h) or h <= 0.0:
            raise ValueError(f"spacing must be a positive length, got {h!r}")
        object.__setattr__(self, "samples", _as_readonly(arr))
        object.__setattr__(self, "spacing", h)

    @property
    def extent(self) -> tuple[float, float]:
        """Periodic box size (x extent, z extent) in meters."""
        nx, nz = self.samples.shape
        return (nx * self.spacing, nz * self.spacing)


@dataclass(frozen=True)
class FieldGrid:
    """Potential (V) or one field component (V/m) on the source grid, at a height."""

    samples: np.ndarray
    spacing: float
    height: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2:
            raise ValueError("samples must be 2D")
        object.__setattr__(self, "samples", _as_readonly(arr))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "height", float(self.height))


def _wavenumbers(shape: tuple[int, int], spacing: float):
    """Angular wavenumber grids (kx, kz, |k|) for an rfft2 of the given shape."""
    nx, nz = shape
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=spacing)
    kz = 2.0 * np.pi * np.fft.rfftfreq(nz, d=spacing)
    KX, KZ = np.meshgrid(kx, kz, indexing="ij")
    return KX, KZ, np.hypot(KX, KZ)


def field_multipliers(shape: tuple[int, int], spacing: float, height: float):
    """Spectral multipliers turning a boundary spectrum into (Ex, Ey, Ez) spectra.

    Returns three arrays shaped like the rfft2 of the boundary samples.
    The odd-derivative multipliers (Ex, Ez) are zeroed at their Nyquist
    frequencies, the standard convention for differentiating real grid
    data; the energy there is suppressed by exp(-2*height*k_nyquist)
    anyway at any height the grid can resolve.
    """
    KX, KZ, K = _wavenumbers(shape, spacing)
    decay = np.exp(-height * K)
    mx = -1j * KX * decay
    mz = -1j * KZ * decay
    my = K * decay
    nx, nz = shape
    if nx % 2 == 0:
        mx[nx // 2, :] = 0.0
    if nz % 2 == 0:
        mz[:, -1] = 0.0
    return mx, my, mz


def propagate_potential(b: BoundaryGrid, height: Length | float) -> FieldGrid:
    """Lift a boundary potential to the plane y = height.

    Spectral solution of the Laplace equation on the periodic box: every
    planar Fourier mode decays as ``exp(-height * |k|)``. The k = 0 mode
    carries the grid mean and is left unchanged, which treats the mean as
    a uniform offset of the whole boundary; a constant boundary therefore
    propagates to the same constant at every height.
    """
    y = as_meters(height)
    F = np.fft.rfft2(b.samples)
    _, _, K = _wavenumbers(b.samples.shape, b.spacing)
    out = np.fft.irfft2(F * np.exp(-y * K), s=b.samples.shape)
    return FieldGrid(samples=out, spacing=b.spacing, height=y)


def field_at(
    b: BoundaryGrid, height: Length | float
) -> tuple[FieldGrid, FieldGrid, FieldGrid]:
    """Electric field components (Ex, Ey, Ez) at y = height.

    The field is minus the gradient of the propagated potential, applied
    in Fourier space: Ex and Ez pick up ``-i k`` factors from the planar
    derivatives, Ey picks up ``+|k|`` from the height derivative of the
    decay factor. The k = 0 mode contributes nothing to any component, so
    a uniform boundary produces zero field.
    """
    y = as_meters(height)
    shape = b.samples.shape
    F = np.fft.rfft2(b.samples)
    mx, my, mz = field_multipliers(shape, b.spacing, y)
    ex = np.fft.irfft2(F * mx, s=shape)
    ey = np.fft.irfft2(F * my, s=shape)
    ez = np.fft.irfft2(F * mz, s=shape)

    def grid(a: np.ndarray) -> FieldGrid:
        return FieldGrid(samples=a, spacing=b.spacing, height=y)

    return grid(ex), grid(ey), grid(ez)
