"""
gpcond - Gaussian process conditioning on finitely and countably many observations.

Exact finite-dimensional conditioning (pseudoinverse for noise-free data, Cholesky for
noisy data), nested dense refinement with numerical convergence monitoring, and
reproducible sampling.

Usage:
    from gpcond import GpPrior, Kernel, Domain, ObservationSet, condition

    prior = GpPrior(Domain.interval(0.0, 1.0), Kernel.brownian())
    obs = ObservationSet.point_evaluations([1.0], [0.0])
    post = condition(prior, obs)

    # Brownian bridge: min(s, t) - s * t
    posterior_cov(post, 0.3, 0.6)

    # Refine on nested Halton designs and watch the posteriors settle
    report = refine_and_monitor(prior, Domain.interval(0.0, 1.0), g, [3, 5, 9, 17], grid)
"""

from .conditioning import (
    ObservationSet,
    PosteriorGp,
    condition,
    interpolation_check,
    posterior_cov,
    posterior_gram,
    posterior_mean,
    posterior_variance,
)
from .config import ExperimentConfig, config_from_mapping, parse_config
from .domain import (
    fill_distance,
    halton_sequence,
    kernel_metric,
    nested_design,
    snap_to_grid,
    uniform_grid,
    van_der_corput,
)
from .exceptions import (
    ConfigError,
    GpcondError,
    InvalidArgumentError,
    InvalidUsageError,
    NotPsdError,
    NotSpdError,
    NumericalFailureError,
    UnsupportedFunctionalError,
)
from .kernels import (
    GpPrior,
    Kernel,
    MeanFunction,
    ObservationFunctional,
    cross_cov,
    cross_cov_matrix,
    gram,
    kernel_eval,
)
from .linalg import (
    SpectralDecomposition,
    eigh_sym,
    gram_difference_eigenvalues,
    operator_norm,
    pinv_psd,
    psd_project,
    psd_sqrt,
    psd_truncate,
    solve_spd,
    trace_norm,
)
from .models import (
    CharProbe,
    Command,
    ConditionResult,
    ConvergenceReport,
    ConvergenceTolerances,
    Domain,
    Eigensolver,
    InterpolationReport,
    KernelFamily,
    LevelRecord,
    NestedDesign,
    PathSample,
    RefinementSchedule,
)
from .refinement import (
    AnalyticFunction,
    SampledPath,
    char_functional,
    contraction_experiment,
    default_probes,
    refine_and_monitor,
)
from .runner import ExperimentRunner
from .sampling import Rng, sample_paths

__version__ = "0.1.0"
__all__ = [
    "ExperimentRunner",
    "ExperimentConfig",
    "parse_config",
    "config_from_mapping",
    # Models
    "Domain",
    "NestedDesign",
    "RefinementSchedule",
    "CharProbe",
    "ConvergenceTolerances",
    "LevelRecord",
    "ConvergenceReport",
    "ConditionResult",
    "InterpolationReport",
    "PathSample",
    "KernelFamily",
    "Command",
    "Eigensolver",
    # Domain
    "van_der_corput",
    "halton_sequence",
    "nested_design",
    "uniform_grid",
    "snap_to_grid",
    "kernel_metric",
    "fill_distance",
    # Kernels
    "Kernel",
    "MeanFunction",
    "ObservationFunctional",
    "GpPrior",
    "kernel_eval",
    "gram",
    "cross_cov",
    "cross_cov_matrix",
    # Linear algebra
    "SpectralDecomposition",
    "eigh_sym",
    "pinv_psd",
    "solve_spd",
    "trace_norm",
    "operator_norm",
    "psd_project",
    "psd_sqrt",
    "psd_truncate",
    "gram_difference_eigenvalues",
    # Conditioning
    "ObservationSet",
    "PosteriorGp",
    "condition",
    "posterior_mean",
    "posterior_cov",
    "posterior_variance",
    "posterior_gram",
    "interpolation_check",
    # Refinement
    "SampledPath",
    "AnalyticFunction",
    "char_functional",
    "default_probes",
    "refine_and_monitor",
    "contraction_experiment",
    # Sampling
    "Rng",
    "sample_paths",
    # Exceptions
    "GpcondError",
    "InvalidArgumentError",
    "NotPsdError",
    "NotSpdError",
    "NumericalFailureError",
    "UnsupportedFunctionalError",
    "InvalidUsageError",
    "ConfigError",
]
