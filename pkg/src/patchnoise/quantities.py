"""Physical quantities, constants, and model-parameter validation.

Everything internal runs in SI base units. Micrometres, MHz and friends
belong at the I/O boundary (CLI flags, CSV columns), never inside the
library. Each quantity is a small frozen dataclass so that a Length can
never silently stand in for a frequency.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

__all__ = [
    "Length",
    "AngularFrequency",
    "FieldNoiseDensity",
    "NoiseAmplitude",
    "PhysicalConstants",
    "CONSTANTS",
    "SurfacePatchModel",
    "validate_model",
    "as_meters",
    "as_angular_frequency",
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Length:
    """A strictly positive distance in meters (probe height d, correlation length)."""

    value: float

    def __post_init__(self) -> None:
        v = _require_finite("Length.value", self.value)
        if v <= 0.0:
            raise ValueError(f"Length.value must be > 0 m, got {v!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class AngularFrequency:
    """Angular frequency in rad/s, strictly positive."""

    value: float

    def __post_init__(self) -> None:
        v = _require_finite("AngularFrequency.value", self.value)
        if v <= 0.0:
            raise ValueError(f"AngularFrequency.value must be > 0 rad/s, got {v!r}")
        object.__setattr__(self, "value", v)

    @property
    def hertz(self) -> float:
        return self.value / (2.0 * math.pi)

    @classmethod
    def from_hertz(cls, f: float) -> "AngularFrequency":
        return cls(2.0 * math.pi * float(f))


@dataclass(frozen=True)
class FieldNoiseDensity:
    """One-sided electric-field noise spectral density, V^2 m^-2 Hz^-1, non-negative."""

    value: float

    def __post_init__(self) -> None:
        v = _require_finite("FieldNoiseDensity.value", self.value)
        if v < 0.0:
            raise ValueError(f"FieldNoiseDensity.value must be >= 0, got {v!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class NoiseAmplitude:
    """Surface-noise amplitude in V^2/Hz.

    This is the product of the patch density and the single-patch voltage
    noise density, kept as one number because only the product is ever
    observable: the two factors cannot be fitted separately.
    """

    value: float

    def __post_init__(self) -> None:
        v = _require_finite("NoiseAmplitude.value", self.value)
        if v < 0.0:
            raise ValueError(f"NoiseAmplitude.value must be >= 0 V^2/Hz, got {v!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants used by the rate conversions. Immutable."""

    elementary_charge: float = 1.602176634e-19  # C, exact
    hbar: float = 1.054571817e-34  # J s
    boltzmann: float = 1.380649e-23  # J/K, exact
    atomic_mass: float = 1.66053906660e-27  # kg


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class SurfacePatchModel:
    """Validated parameter bundle for the correlated-patch noise model.

    Parameters
    ----------
    zeta:
        Correlation length of the boundary potential, meters.
    nsv:
        Noise amplitude (patch count density times voltage noise density)
        at the reference frequency ``omega0``, V^2/Hz.
    omega0:
        Reference angular frequency at which ``nsv`` is quoted, rad/s.
    alpha:
        Frequency exponent: the amplitude at omega is
        ``nsv * (omega0 / omega) ** alpha``. Defaults to 1, the inverse
        frequency law seen in room-temperature trap data.
    """

    zeta: Length
    nsv: NoiseAmplitude
    omega0: AngularFrequency
    alpha: float = 1.0

    def __post_init__(self) -> None:
        a = _require_finite("SurfacePatchModel.alpha", self.alpha)
        if a < 0.0:
            raise ValueError(f"SurfacePatchModel.alpha must be >= 0, got {a!r}")
        object.__setattr__(self, "alpha", a)

    def to_dict(self) -> dict:
        return {
            "zeta_m": self.zeta.value,
            "nsv_v2_per_hz": self.nsv.value,
            "omega0_rad_per_s": self.omega0.value,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurfacePatchModel":
        return cls(
            zeta=Length(d["zeta_m"]),
            nsv=NoiseAmplitude(d["nsv_v2_per_hz"]),
            omega0=AngularFrequency(d["omega0_rad_per_s"]),
            alpha=float(d.get("alpha", 1.0)),
        )

    def to_json(self) -> str:
        # repr-based float serialization round-trips bit-exactly
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SurfacePatchModel":
        return cls.from_dict(json.loads(text))


def validate_model(
    zeta: Length | float,
    nsv: NoiseAmplitude | float,
    omega0: AngularFrequency | float,
    alpha: float = 1.0,
) -> SurfacePatchModel:
    """Build a SurfacePatchModel, raising a field-specific ValueError on bad input.

    Accepts either the typed quantities or raw SI floats.
    """
    try:
        z = zeta if isinstance(zeta, Length) else Length(float(zeta))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid correlation length zeta: {exc}") from exc
    try:
        n = nsv if isinstance(nsv, NoiseAmplitude) else NoiseAmplitude(float(nsv))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid noise amplitude nsv: {exc}") from exc
    try:
        w = (
            omega0
            if isinstance(omega0, AngularFrequency)
            else AngularFrequency(float(omega0))
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid reference frequency omega0: {exc}") from exc
    return SurfacePatchModel(zeta=z, nsv=n, omega0=w, alpha=alpha)


def as_meters(x: Length | float) -> float:
    """Coerce a Length or a raw positive float to meters."""
    if isinstance(x, Length):
        return x.value
    return Length(float(x)).value


def as_angular_frequency(x: AngularFrequency | float) -> float:
    if isinstance(x, AngularFrequency):
        return x.value
    return AngularFrequency(float(x)).value
