"""Spherical quasi-convexity of quadratic forms on cone caps."""

from .analysis import (
    AnalysisOptions,
    AnalysisReport,
    ConditionId,
    Status,
    Verdict,
    analyze,
    cap_range,
    compute_alpha_eta,
)
from .cones import ConeSpec, contains, dual_contains, moreau_decompose, project_lorentz, sample_cap
from .copositivity import CopositivityStatus, certify_copositive, lorentz_copositive
from .errors import (
    DegenerateGeodesicError,
    DomainError,
    InvalidInputError,
    ParseError,
    SamplingBudgetExceeded,
    SolverFailure,
    SQCError,
    UnsupportedConeError,
)
from .linalg import spectral_decompose
from .oracle import (
    OracleStatus,
    geodesic_quasiconvexity_test,
    pairwise_test,
    sublevel_convexity_test,
)

__all__ = [
    "AnalysisOptions", "AnalysisReport", "ConditionId", "Status", "Verdict", "analyze",
    "cap_range", "compute_alpha_eta", "ConeSpec", "contains", "dual_contains",
    "moreau_decompose", "project_lorentz", "sample_cap", "CopositivityStatus",
    "certify_copositive", "lorentz_copositive", "DegenerateGeodesicError", "DomainError",
    "InvalidInputError", "ParseError", "SamplingBudgetExceeded", "SolverFailure", "SQCError",
    "UnsupportedConeError", "spectral_decompose", "OracleStatus",
    "geodesic_quasiconvexity_test", "pairwise_test", "sublevel_convexity_test",
]
