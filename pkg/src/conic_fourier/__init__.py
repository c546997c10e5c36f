"""Fourier orthogonal expansions on conic surfaces and solid cones.

The package evaluates Jacobi kernels, the closed-form reproducing kernels of
the cone, projection operators and their summability means, maximal
functions, and empirical checks of multiplier theorems.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConicError,
    DomainError,
    NumericError,
    ParameterError,
    ResolutionError,
    ResolutionWarning,
)
from .jacobi import (
    JacobiParams,
    QuadratureRule1D,
    eval_jacobi,
    eval_Zn,
    gauss_jacobi_rule,
    gegenbauer_measure,
    gegenbauer_Z,
    jacobi_norm,
    jacobi_series,
    jacobi_table,
    z_table,
)
from .geometry import (
    SolidPoint,
    SurfacePoint,
    WeightedGrid,
    cap_measure_solid,
    cap_measure_surface,
    distance_solid,
    distance_surface,
    sample_solid,
    sample_surface,
    solid_grid,
    surface_grid,
)
from .kernels import (
    AdditionSpec,
    apply_T,
    cesaro_coefficients,
    cesaro_kernel,
    indicator_T,
    poisson_kernel_closed,
    reproducing_kernel,
)
from .expansion import (
    ProjectionTable,
    SampledFunction,
    apply_multiplier,
    cesaro_mean,
    convolve,
    dim_Vn,
    lp_norm,
    partial_sum,
    poisson_integral,
    project,
    projection_table,
    translate,
)
from .maximal import (
    MaximalConfig,
    battery,
    default_theta_grid,
    domination_experiment,
    hl_maximal,
    maximal_cesaro,
    maximal_poisson,
    multiplier_battery,
    sample_points,
    script_maximal,
)
from .multipliers import (
    MultiplierSequence,
    boundedness_experiment,
    difference,
    marcinkiewicz_blocks,
    marcinkiewicz_bound,
    operator_norm_l2,
    thresholds,
)
from .config import ExperimentConfig, load_config
