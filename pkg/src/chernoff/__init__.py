"""Product-formula approximation of backward propagators on the circle and sphere.

The package builds quadrature grids on embedded circles and spheres, assembles
row-stochastic Gaussian step operators for time-dependent scalings of the
embedding, and composes them into propagator approximations.  Spectral
references, short-time expansion fits, and a Markov-chain sampler for
conditioned finite-dimensional distributions round out the experiment surface.
"""

__version__ = "0.1.0"

from ._accel import BACKEND
from .asymptotics import (
    ExpansionFit,
    ExpansionPrediction,
    default_t_samples,
    kernel_tail_bound,
    measure_normalized,
    measure_unnormalized,
    predict_normalized,
    predict_unnormalized,
    remainder_exponent_check,
)
from .catalog import TestFunction, resolve
from .conditioned import (
    FddReport,
    PathSkeleton,
    fdd_estimate,
    fdd_reference,
    off_partition_density,
    off_partition_normalization,
    sample_skeleton,
    sample_step,
    shell_density_limit,
)
from .engine import (
    ConvergenceTable,
    GeneratorDefectTable,
    Partition,
    apply_product,
    convergence_study,
    generator_consistency_check,
    self_convergence_study,
    uniform_partition,
)
from .errors import (
    ChernoffError,
    CheckFailed,
    IllConditionedFit,
    InvalidConfig,
    InvalidPartition,
    InvalidResolution,
    InvalidTimeOrder,
    KernelUnderResolved,
    PointNotOnManifold,
    ShapeMismatch,
    ShellTooThick,
    TimesNotInPartition,
    UnsupportedScaling,
)
from .geometry import (
    EigenIndex,
    ManifoldSpec,
    QuadratureGrid,
    build_grid,
    chordal_sq,
    double_laplacian_chordal,
    eigenfunction,
    eigenvalue,
    geodesic_distance,
    integrate,
    project_tangent,
    scalar_curvature,
)
from .kernels import (
    GridFunction,
    KernelOperator,
    ScalingComponent,
    TimeScaling,
    assemble_step_operator,
    normalized_manifold_density,
    pushforward_identity_check,
    resolution_check,
    transition_density,
)
from .spectral import (
    ScalarGeneratorModel,
    SpectralFunction,
    drift_vanishes,
    final_value_residual,
    generator_apply,
    propagate,
    propagator_law_check,
)

__all__ = [
    "BACKEND",
    "ChernoffError",
    "CheckFailed",
    "ConvergenceTable",
    "EigenIndex",
    "ExpansionFit",
    "ExpansionPrediction",
    "FddReport",
    "GeneratorDefectTable",
    "GridFunction",
    "IllConditionedFit",
    "InvalidConfig",
    "InvalidPartition",
    "InvalidResolution",
    "InvalidTimeOrder",
    "KernelOperator",
    "KernelUnderResolved",
    "ManifoldSpec",
    "Partition",
    "PathSkeleton",
    "PointNotOnManifold",
    "QuadratureGrid",
    "ScalarGeneratorModel",
    "ScalingComponent",
    "ShapeMismatch",
    "ShellTooThick",
    "SpectralFunction",
    "TestFunction",
    "TimeScaling",
    "TimesNotInPartition",
    "UnsupportedScaling",
    "apply_product",
    "assemble_step_operator",
    "build_grid",
    "chordal_sq",
    "convergence_study",
    "default_t_samples",
    "double_laplacian_chordal",
    "drift_vanishes",
    "eigenfunction",
    "eigenvalue",
    "fdd_estimate",
    "fdd_reference",
    "final_value_residual",
    "generator_apply",
    "generator_consistency_check",
    "geodesic_distance",
    "integrate",
    "kernel_tail_bound",
    "measure_normalized",
    "measure_unnormalized",
    "normalized_manifold_density",
    "off_partition_density",
    "off_partition_normalization",
    "predict_normalized",
    "predict_unnormalized",
    "project_tangent",
    "propagate",
    "propagator_law_check",
    "pushforward_identity_check",
    "remainder_exponent_check",
    "resolution_check",
    "resolve",
    "sample_skeleton",
    "sample_step",
    "scalar_curvature",
    "self_convergence_study",
    "shell_density_limit",
    "transition_density",
    "uniform_partition",
]
