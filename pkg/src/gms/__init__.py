"""Generalized metric spaces: exhaustive axiom verification, classification,
and certified fixed-point solvers over finite distance tables."""

from .classify import (
    HierarchyProfile,
    MinOrderResult,
    hierarchy_profile,
    min_coefficient,
    min_order,
    min_theta,
)
from .search import (
    SEARCH_GOALS,
    GenerationError,
    SearchResult,
    SearchTarget,
    random_contraction,
    random_space,
    random_theta_space,
    search_separation,
)
from .solvers import (
    AffineMap,
    CauchyBoundCheck,
    CauchyBoundParams,
    CauchyDiagnostic,
    ContractionProfile,
    FiniteContext,
    FitResult,
    FixedPointCertificate,
    HypothesisRejected,
    HypothesisReport,
    IntervalContext,
    IterationTrace,
    LimitSetResult,
    OrbitDistinctness,
    PsiFunction,
    RateCheck,
    TableMap,
    THEOREMS,
    cauchy_bound_check,
    cauchy_diagnostic,
    check_hypotheses,
    distinct_orbit_check,
    estimate_constants,
    fit_reich_grid,
    limit_set,
    picard_orbit,
    profile_rate,
    rate_certificate,
    reich_lp_optimum,
    solve,
    trace_pair_distances,
    validate_psi,
)
from .spaces import (
    AxiomProfile,
    CombinationError,
    DistanceTable,
    KIND_NAMES,
    PreconditionError,
    ThetaTable,
    VerificationReport,
    ViolationWitness,
    build_affine_theta_example,
    combine_spaces,
    polygon_slack,
    polygon_tuple_count,
    verify_axioms,
    zero_offdiag_check,
)

__version__ = "0.1.0"
