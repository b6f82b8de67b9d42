"""Heat and fractional Poisson kernels on rank-one hyperbolic spaces.

Numerical kernels (closed forms, subordination, spectral inversion),
sharp asymptotics and envelope checks, critical-region masses, long-time
convergence experiments on the ambient space and on the solvable group
side, and the spherical-transform toolbox backing them.
"""

from .space import SpaceDescriptor, preset, PRESET_NAMES
from .spectral import (
    RadialFunction,
    SpectralFunction,
    calibrate,
    sft_forward,
    sft_inverse,
    spherical_function,
)
from .kernels import (
    heat_kernel,
    heat_radial_mass,
    q_kernel,
    q_mass,
    q_multiplier,
    q_routes_delta,
    q_sup_norm,
    q_asymptotic_ratio,
    critical_region_mass,
)
from .distinguished import (
    q0_kernel,
    q0_multiplier,
    q0_routes_delta,
    q0_asymptotic_ratio,
    qtilde_eval,
    qtilde_sup_norm,
    qtilde_critical_mass,
)
from .convergence import (
    Datum,
    ExperimentSpec,
    parse_config,
    l1_distance,
    linf_group_distance,
    dirac_distance,
    boundary_functional,
    scaled_sup_series,
    delayed_diff_series,
    run_experiment,
)
from .numerics import (
    LogValue,
    QuadratureError,
    CancellationError,
    DomainError,
    ResolutionError,
)

__version__ = "0.1.0"

__all__ = [
    "SpaceDescriptor", "preset", "PRESET_NAMES",
    "RadialFunction", "SpectralFunction", "calibrate",
    "sft_forward", "sft_inverse", "spherical_function",
    "heat_kernel", "heat_radial_mass",
    "q_kernel", "q_mass", "q_multiplier", "q_routes_delta",
    "q_sup_norm", "q_asymptotic_ratio", "critical_region_mass",
    "q0_kernel", "q0_multiplier", "q0_routes_delta",
    "q0_asymptotic_ratio", "qtilde_eval", "qtilde_sup_norm",
    "qtilde_critical_mass",
    "Datum", "ExperimentSpec", "parse_config",
    "l1_distance", "linf_group_distance", "dirac_distance",
    "boundary_functional", "scaled_sup_series", "delayed_diff_series",
    "run_experiment",
    "LogValue", "QuadratureError", "CancellationError",
    "DomainError", "ResolutionError",
    "__version__",
]
