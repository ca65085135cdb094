"""Optimal quantum state discrimination: minimum error, unambiguous,
maximum confidence and mutual information, with independent oracles."""

from .core import (
    DEFAULT_TOL,
    INCONCLUSIVE,
    DimensionMismatch,
    DiscriminationError,
    Pom,
    StateEnsemble,
    Tolerances,
    ValidationReport,
    born_probability,
    eigendecompose,
    joint_probabilities,
    kernel_projector,
    support_inverse_sqrt,
    support_projector,
    validate_pom,
)
from .ensembles import (
    EnsembleFormatError,
    SymmetricEnsembleSpec,
    coherent_pair,
    load_ensemble,
    tetrad,
    trine,
    two_pure,
)
from .maxconf import (
    ConfidenceResult,
    confidence,
    max_confidence_pom,
    max_confidence_value,
    no_signaling_confidence_oracle,
    weighted_average_confidence,
)
from .minerror import (
    IncompleteMeasurementWarning,
    MinErrorResult,
    OptimizerConfig,
    check_optimality,
    helstrom_two_pure,
    no_measurement_optimal,
    optimize_min_error,
    square_root_measurement,
    two_mixed_optimal,
    weighted_srm,
)
from .mutualinfo import (
    accessible_info_search,
    best_projective_qubit,
    elimination_measurement,
    mutual_information,
)
from .simulator import (
    OutcomeCounts,
    PathEncoding,
    empirical_figures,
    naimark_path_encoding,
    sample_outcomes,
    split_rank_one,
)
from .unambiguous import (
    Regime,
    UnambiguousResult,
    coherent_overlap_demo,
    indistinguishable_result,
    linear_independence,
    max_equal_success,
    mixed_unamb_feasibility,
    no_signaling_unamb_oracle,
    reciprocal_states,
    unamb_n_pure,
    unamb_two_pure,
)
from .verify import verify_suite

__all__ = [name for name in dir() if not name.startswith("_")]
