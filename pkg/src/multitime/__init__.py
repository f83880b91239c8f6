"""Magnus-expansion propagation and multitime nonclassicality tests for a
degenerate parametric amplifier with frequency mismatch."""

from multitime.errors import (
    ArityMismatch,
    ConvergenceGateViolation,
    GridRangeError,
    NonHermitianInput,
    ParamMismatch,
    StructureViolation,
    ToleranceNotReached,
    TruncationError,
)
from multitime.magnus import ModelParams, convergence_gate, magnus_terms, term_norm_map
from multitime.propagator import (
    Propagator,
    assemble,
    assemble_stepped,
    ode_oracle,
    unequal_time_commutator,
)
from multitime.charfunc import (
    OrderedMoments,
    char_fn,
    lambda_max_curve,
    ordered_moments,
    principal_axes,
    quadratic_form,
    two_time_surface,
)
from multitime.fock import fock_oracle
from multitime.criteria import (
    BetaConfig,
    charfn_matrix,
    det2,
    minor_hierarchy,
    search_violation,
)

__version__ = "0.1.0"

__all__ = [
    "ArityMismatch",
    "BetaConfig",
    "ConvergenceGateViolation",
    "GridRangeError",
    "ModelParams",
    "NonHermitianInput",
    "OrderedMoments",
    "ParamMismatch",
    "Propagator",
    "StructureViolation",
    "ToleranceNotReached",
    "TruncationError",
    "assemble",
    "assemble_stepped",
    "char_fn",
    "charfn_matrix",
    "convergence_gate",
    "det2",
    "fock_oracle",
    "lambda_max_curve",
    "magnus_terms",
    "minor_hierarchy",
    "ode_oracle",
    "ordered_moments",
    "principal_axes",
    "quadratic_form",
    "search_violation",
    "term_norm_map",
    "two_time_surface",
    "unequal_time_commutator",
]
