"""Electric-field noise above a conductor with correlated patch potentials.

The package has three layers. ``kernel`` solves the half-space Dirichlet
problem that maps a boundary potential to potentials and fields above
the plane. ``spectrum`` carries the analytic noise model built on that
kernel, with its scaling function, asymptotics, and quadrature
cross-checks. ``montecarlo`` generates random Voronoi patch surfaces and
measures the same statistics by brute force, which is how the analytic
results are validated rather than trusted. ``experiments`` and ``cli``
connect the model to published probe measurements.
"""

from .quantities import (
    CONSTANTS,
    AngularFrequency,
    FieldNoiseDensity,
    Length,
    NoiseAmplitude,
    PhysicalConstants,
    SurfacePatchModel,
    validate_model,
)
from .kernel import (
    BoundaryGrid,
    FieldGrid,
    KernelPoint,
    field_at,
    kernel,
    kernel_gradient,
    propagate_potential,
)
from .spectrum import (
    ASYMPTOTE_CROSSING_RHO,
    NoiseCurve,
    QuadratureError,
    ScalingPoint,
    asymptotic_long,
    asymptotic_short,
    gradient_hankel_components,
    noise_density,
    noise_density_direct,
    s_zeta,
    sample_curve,
    scaling_curve,
    scaling_function,
)
from .montecarlo import (
    CorrelationEstimate,
    FactorizationReport,
    PatchTessellation,
    TessellationSpec,
    VarianceProfile,
    analytic_variance,
    boundary_correlation,
    field_variance,
    generate_tessellation,
    temporal_factorization_check,
)
from .experiments import (
    CantileverProbe,
    ExperimentRecord,
    FitResult,
    IonSpecies,
    ZetaFit,
    builtin_dataset,
    damping_rate,
    fit_dataset,
    fit_nsv,
    fit_zeta,
    heating_rate,
    invert_heating,
    load_dataset,
    rescale,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "AngularFrequency",
    "FieldNoiseDensity",
    "Length",
    "NoiseAmplitude",
    "PhysicalConstants",
    "SurfacePatchModel",
    "validate_model",
    "BoundaryGrid",
    "FieldGrid",
    "KernelPoint",
    "field_at",
    "kernel",
    "kernel_gradient",
    "propagate_potential",
    "ASYMPTOTE_CROSSING_RHO",
    "NoiseCurve",
    "QuadratureError",
    "ScalingPoint",
    "asymptotic_long",
    "asymptotic_short",
    "gradient_hankel_components",
    "noise_density",
    "noise_density_direct",
    "s_zeta",
    "sample_curve",
    "scaling_curve",
    "scaling_function",
    "CorrelationEstimate",
    "FactorizationReport",
    "PatchTessellation",
    "TessellationSpec",
    "VarianceProfile",
    "analytic_variance",
    "boundary_correlation",
    "field_variance",
    "generate_tessellation",
    "temporal_factorization_check",
    "CantileverProbe",
    "ExperimentRecord",
    "FitResult",
    "IonSpecies",
    "ZetaFit",
    "builtin_dataset",
    "damping_rate",
    "fit_dataset",
    "fit_nsv",
    "fit_zeta",
    "heating_rate",
    "invert_heating",
    "load_dataset",
    "rescale",
    "__version__",
]
