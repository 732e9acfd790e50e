"""Verification laboratory for cluster-volume differential inequalities.

Exact enumeration on small graphs certifies every inequality the library
states; Monte Carlo engines (coupled percolation sheets, heat-bath dynamics,
coupling from the past) reproduce them at desk scale on lattices, together
with sharpness bounds and critical-exponent relations.
"""

from ._version import __version__
from .clusters import (
    DEFAULT_CONFIDENCE,
    MomentTable,
    TailAccumulator,
    TailCurve,
    cluster_radius,
    decompose,
    empirical_moments,
    synthetic_moments,
    synthetic_tail,
    tail_curve,
)
from .config import ExperimentConfig, config_hash, load_config, parse_config
from .errors import (
    BudgetError,
    DomainError,
    EnumerationCapError,
    InsufficientDataError,
    IntegrityError,
    InvalidSpecError,
    SchemaError,
    VolumeLabError,
)
from .exact import (
    ENUMERATION_CAP,
    ExactMeasure,
    ModelParams,
    check_fkg_lattice,
    check_monotonic,
    derivative_gap_ratio,
    enumerate_measure,
    exact_covariance,
    exact_event_prob,
    exact_radius_tail,
    exact_tail,
    verify_derivative_formula,
)
from .fits import (
    ExponentEstimates,
    ExponentFit,
    TailFitReport,
    check_exponent_inequalities,
    check_exponential_tail,
    estimate_beta_c,
    fit_Delta,
    fit_delta,
    fit_gamma,
    moment_bound_constant,
)
from .ghost import (
    GhostLab,
    GhostParams,
    revealment_bound_check,
    revealment_exact,
    truncated_magnetization,
    truncated_magnetization_bound,
    verify_osss,
    verify_prop31,
)
from .graphs import (
    BoundaryCondition,
    LatticeSpec,
    WeightedGraph,
    apply_boundary,
    build_lattice,
    complete_graph,
    from_edge_list_text,
    named_graph,
    small_graph_catalog,
    susceptibility_constant,
    to_edge_list_text,
)
from .inequalities import (
    BetaGridCurves,
    GridDifference,
    InequalityReport,
    check_diffineq,
    check_integrated,
    classify,
    combined_half_width,
    diffineq_rhs,
    dominance_violations,
    integrated_bound_mean,
    integrated_bound_tail,
    log_tail_derivative,
    menshikov_check,
    sharpness_check,
    sharpness_lower_bound,
)
from .meanfield import complete_cluster_sizes, meanfield_subcritical_scan, meanfield_tail
from .rng import substream
from .runner import RunManifest, build_curves, estimate_exponents, run, run_checks
from .samplers import (
    CouplingSheet,
    cftp_sample,
    cftp_sample_batch,
    glauber_size_samples,
    heat_bath_invariance_error,
    sample_bernoulli_coupled,
    validate_sampler,
)

__all__ = [
    "__version__",
    # clusters
    "DEFAULT_CONFIDENCE",
    "MomentTable",
    "TailAccumulator",
    "TailCurve",
    "cluster_radius",
    "decompose",
    "empirical_moments",
    "synthetic_moments",
    "synthetic_tail",
    "tail_curve",
    # config
    "ExperimentConfig",
    "config_hash",
    "load_config",
    "parse_config",
    # errors
    "BudgetError",
    "DomainError",
    "EnumerationCapError",
    "InsufficientDataError",
    "IntegrityError",
    "InvalidSpecError",
    "SchemaError",
    "VolumeLabError",
    # exact
    "ENUMERATION_CAP",
    "ExactMeasure",
    "ModelParams",
    "check_fkg_lattice",
    "check_monotonic",
    "derivative_gap_ratio",
    "enumerate_measure",
    "exact_covariance",
    "exact_event_prob",
    "exact_radius_tail",
    "exact_tail",
    "verify_derivative_formula",
    # fits
    "ExponentEstimates",
    "ExponentFit",
    "TailFitReport",
    "check_exponent_inequalities",
    "check_exponential_tail",
    "estimate_beta_c",
    "fit_Delta",
    "fit_delta",
    "fit_gamma",
    "moment_bound_constant",
    # ghost
    "GhostLab",
    "GhostParams",
    "revealment_bound_check",
    "revealment_exact",
    "truncated_magnetization",
    "truncated_magnetization_bound",
    "verify_osss",
    "verify_prop31",
    # graphs
    "BoundaryCondition",
    "LatticeSpec",
    "WeightedGraph",
    "apply_boundary",
    "build_lattice",
    "complete_graph",
    "from_edge_list_text",
    "named_graph",
    "small_graph_catalog",
    "susceptibility_constant",
    "to_edge_list_text",
    # inequalities
    "BetaGridCurves",
    "GridDifference",
    "InequalityReport",
    "check_diffineq",
    "check_integrated",
    "classify",
    "combined_half_width",
    "diffineq_rhs",
    "dominance_violations",
    "integrated_bound_mean",
    "integrated_bound_tail",
    "log_tail_derivative",
    "menshikov_check",
    "sharpness_check",
    "sharpness_lower_bound",
    # meanfield
    "complete_cluster_sizes",
    "meanfield_subcritical_scan",
    "meanfield_tail",
    # rng
    "substream",
    # runner
    "RunManifest",
    "build_curves",
    "estimate_exponents",
    "run",
    "run_checks",
    # samplers
    "CouplingSheet",
    "cftp_sample",
    "cftp_sample_batch",
    "glauber_size_samples",
    "heat_bath_invariance_error",
    "sample_bernoulli_coupled",
    "validate_sampler",
]
