"""Simulation lab for tail bounds of suprema of normalized partial sums over
grid indicator classes on [0, 1]."""

from importlib.metadata import PackageNotFoundError, version as _version

from .bounds import (
    DEFAULT_PARAMS,
    BoundParams,
    Regime,
    bennett_bound,
    bennett_simplified,
    calibration_report,
    classify_regime,
    lower_bound_level,
    threshold_u,
    threshold_u_bar,
    upper_bound_extension,
    upper_bound_gap,
    upper_bound_theorem1,
    upper_bound_theorem31,
)
from .empirical import (
    SamplePath,
    empirical_cdf,
    modulus_statistic,
    normalized_process,
    sample_uniform,
    sup_direct,
    sup_via_increments,
)
from .errors import DomainError, NotApplicableError, StateSpaceTooLarge
from .function_classes import (
    CoverResult,
    GridClassSpec,
    build_grid_class,
    evaluate_member,
    fit_dense_parameters,
    greedy_cover,
    l1_distance,
    member_moments,
    uniform_measure,
)
from .montecarlo import (
    ComparisonRow,
    ExperimentConfig,
    TailEstimate,
    compare_with_bounds,
    estimate_member_tail,
    estimate_tail,
    exact_tail_small,
    wilson_interval,
)
from .poissonization import (
    CoupledPair,
    PoissonPath,
    analytic_lower_bound,
    cell_counts,
    check_inequality_24,
    coupling_dominates,
    coupling_experiment,
    hat_u_poisson,
    log_T,
    lower_bound_experiment,
    poisson_level_count,
    poisson_max_experiment,
    sample_coupled,
    sample_poisson_process,
)

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.0.0"
