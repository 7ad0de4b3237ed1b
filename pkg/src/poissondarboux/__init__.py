"""Polynomial Poisson systems: structure matrices, Darboux polynomials, first integrals."""

from .polycore import (
    EXACT,
    FLOAT,
    DegreeOverflowError,
    GaussianRational,
    ModeError,
    NotDivisibleError,
    Polynomial,
    RationalizeError,
    exact_divide,
    gaussian,
    rationalize,
)
from .exactlinalg import SingularMatrixError
from .exprparse import (
    ParseError,
    ProblemDef,
    ProblemFormatError,
    VarTable,
    load_problem,
    parse_expression,
    parse_problem,
    render,
)
from .poissoncore import (
    JacobiReport,
    PoissonSystem,
    PolyMap,
    StructureError,
    StructureMatrix,
    build_structure_from_diffeo,
    canonical_matrix,
    check_casimir,
    check_jacobi,
    generic_rank,
    hamiltonian_vector_field,
    lie_derivative,
    transform_structure,
)
from .darboux import (
    DarbouxCandidate,
    NotDarbouxError,
    cofactor_of,
    monomials_up_to,
    search_bilinear_restricted,
    search_with_cofactor,
    verify_candidate,
)
from .integrals import (
    HypothesisReport,
    IndependenceReport,
    IntegralReport,
    NaturalSpec,
    NotProperError,
    Theorem1Build,
    TheoremInstance,
    build_poisson_from_diffeo,
    build_theorem1_system,
    construct_HF,
    hypothesis_report,
    independence_report,
    instance_from_problem,
    natural_system,
    structure_from_problem,
    system_from_problem,
    verify_first_integral,
)
from .numlab import (
    Trajectory,
    drift_report,
    fd_gradient_check,
    integrate,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "EXACT",
    "FLOAT",
    "DegreeOverflowError",
    "GaussianRational",
    "ModeError",
    "NotDivisibleError",
    "Polynomial",
    "RationalizeError",
    "SingularMatrixError",
    "exact_divide",
    "gaussian",
    "rationalize",
    "ParseError",
    "ProblemDef",
    "ProblemFormatError",
    "VarTable",
    "load_problem",
    "parse_expression",
    "parse_problem",
    "render",
    "JacobiReport",
    "PoissonSystem",
    "PolyMap",
    "StructureError",
    "StructureMatrix",
    "build_structure_from_diffeo",
    "canonical_matrix",
    "check_casimir",
    "check_jacobi",
    "generic_rank",
    "hamiltonian_vector_field",
    "lie_derivative",
    "transform_structure",
    "DarbouxCandidate",
    "NotDarbouxError",
    "cofactor_of",
    "monomials_up_to",
    "search_bilinear_restricted",
    "search_with_cofactor",
    "verify_candidate",
    "HypothesisReport",
    "IndependenceReport",
    "IntegralReport",
    "NaturalSpec",
    "NotProperError",
    "Theorem1Build",
    "TheoremInstance",
    "build_poisson_from_diffeo",
    "build_theorem1_system",
    "construct_HF",
    "hypothesis_report",
    "independence_report",
    "instance_from_problem",
    "natural_system",
    "structure_from_problem",
    "system_from_problem",
    "verify_first_integral",
    "Trajectory",
    "drift_report",
    "fd_gradient_check",
    "integrate",
    "write_csv",
    "__version__",
]
