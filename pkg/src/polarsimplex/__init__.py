"""Polarization and covering problems for d+1 points on the unit sphere."""

__version__ = "0.1.0"

from .covering import CoveringReport, cap_radius, covering_radius, optimal_covering_value
from .errors import (
    DegenerateConfigurationError,
    DomainError,
    InvalidParameterError,
    PolarError,
    PreconditionError,
)
from .extended import ExtendedReal
from .geometry import (
    Configuration,
    SimplexGeometry,
    check_rigidity,
    regular_simplex,
    simplex_geometry,
    sum_of_squares,
)
from .kernels import (
    Kernel,
    KernelClass,
    classify_kernel,
    g_transform,
    gaussian_kernel,
    log_kernel,
    parse_kernel_spec,
    riesz_kernel,
    shifted_riesz_kernel,
    u_function,
)
from .oracles import (
    OracleVerdict,
    oracle_barycentric,
    oracle_g_inequality,
    oracle_interior_bounds,
    oracle_u_monotone,
)
from .polarization import PolarizationResult, hemisphere_bound, maximize_polarization
from .potential import (
    PotentialExtremum,
    SolverOptions,
    max_potential,
    min_potential,
    simplex_extrema_closed_form,
    simplex_max_closed_form,
    simplex_min_closed_form,
)

__all__ = [
    "Configuration",
    "CoveringReport",
    "DegenerateConfigurationError",
    "DomainError",
    "ExtendedReal",
    "InvalidParameterError",
    "Kernel",
    "KernelClass",
    "OracleVerdict",
    "PolarError",
    "PolarizationResult",
    "PotentialExtremum",
    "PreconditionError",
    "SimplexGeometry",
    "SolverOptions",
    "cap_radius",
    "check_rigidity",
    "classify_kernel",
    "covering_radius",
    "g_transform",
    "gaussian_kernel",
    "hemisphere_bound",
    "log_kernel",
    "max_potential",
    "maximize_polarization",
    "min_potential",
    "optimal_covering_value",
    "oracle_barycentric",
    "oracle_g_inequality",
    "oracle_interior_bounds",
    "oracle_u_monotone",
    "parse_kernel_spec",
    "regular_simplex",
    "riesz_kernel",
    "shifted_riesz_kernel",
    "simplex_extrema_closed_form",
    "simplex_geometry",
    "simplex_max_closed_form",
    "simplex_min_closed_form",
    "sum_of_squares",
    "u_function",
]
