"""Coverage analysis and offload design for multi-RAT heterogeneous networks.

Access points of each technology/tier class form an independent Poisson
process; a typical user associates with the strongest biased-weight
candidate.  The package computes association probabilities, per-cell load
distributions, SINR and rate coverage, and offload-optimal biases, and
cross-checks everything against a Monte Carlo simulator.
"""

from .model import (
    CLOSED,
    OPEN,
    ApClass,
    ClassId,
    ConfigValidationError,
    NetworkConfig,
    ValidationReport,
    db_to_linear,
    dbm_to_watts,
    from_decibel_units,
    linear_to_db,
    make_class,
    require_valid,
    watts_to_dbm,
)
from .numerics import (
    NumericalError,
    QuadratureSettings,
    decaying_integral,
    pv_area_moment,
    semi_infinite_integral,
    stirling2,
    z_integral,
)
from .association import (
    LoadDistribution,
    association_probabilities,
    association_probability,
    load_ratio,
    mean_association_area,
    rat_offload_fraction,
    served_distance_pdf,
    tagged_load_distribution,
    tagged_load_moment,
    typical_load_pmf,
)
from .coverage import (
    CcdfCurve,
    ClosedFormInapplicableError,
    d_coefficient,
    rate_ccdf,
    rate_coverage,
    rate_coverage_closed_form,
    rate_coverage_mean_load,
    shannon_threshold,
    sinr_ccdf,
    sinr_coverage,
    sinr_coverage_conditioned,
)
from .offload import (
    OptimizationResult,
    SolverError,
    TwoRatScenario,
    bias_sweep,
    golden_section_max,
    optimal_bias_rate,
    optimal_bias_sir,
    optimal_density_sir,
    percentile_rate,
    two_class_sir_coverage,
)
from .montecarlo import (
    EmpiricalSummary,
    SimSettings,
    TrialOutcome,
    run_batch,
    run_trial,
    sample_deployment,
)

__version__ = "0.1.0"

__all__ = [
    "ApClass",
    "CLOSED",
    "CcdfCurve",
    "ClassId",
    "ClosedFormInapplicableError",
    "ConfigValidationError",
    "EmpiricalSummary",
    "LoadDistribution",
    "NetworkConfig",
    "NumericalError",
    "OPEN",
    "OptimizationResult",
    "QuadratureSettings",
    "SimSettings",
    "SolverError",
    "TrialOutcome",
    "TwoRatScenario",
    "ValidationReport",
    "association_probabilities",
    "association_probability",
    "bias_sweep",
    "d_coefficient",
    "db_to_linear",
    "dbm_to_watts",
    "decaying_integral",
    "from_decibel_units",
    "golden_section_max",
    "linear_to_db",
    "load_ratio",
    "make_class",
    "mean_association_area",
    "optimal_bias_rate",
    "optimal_bias_sir",
    "optimal_density_sir",
    "percentile_rate",
    "pv_area_moment",
    "rat_offload_fraction",
    "rate_ccdf",
    "rate_coverage",
    "rate_coverage_closed_form",
    "rate_coverage_mean_load",
    "require_valid",
    "run_batch",
    "run_trial",
    "sample_deployment",
    "semi_infinite_integral",
    "served_distance_pdf",
    "shannon_threshold",
    "sinr_ccdf",
    "sinr_coverage",
    "sinr_coverage_conditioned",
    "stirling2",
    "tagged_load_distribution",
    "tagged_load_moment",
    "typical_load_pmf",
    "watts_to_dbm",
    "z_integral",
]
