"""modeforge: sparse bosonic Fock-space simulation of mode-entanglement protocols."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DomainError,
    ModeforgeError,
    UndefinedReductionError,
    UsageError,
)
from .fock import (
    ATOL,
    PRUNE_TOL,
    LadderPolynomial,
    Mode,
    ModeRegistry,
    StateVector,
    apply_ladder,
    basis_state,
    embed,
    expectation,
    inner,
    mode,
    one_body_operator,
    partial_project,
    restrict,
    shift_occupation,
    state_from_json,
    state_to_json,
    tensor,
    vacuum,
    variance,
)

__all__ = [
    "ATOL",
    "PRUNE_TOL",
    "ConfigurationError",
    "DomainError",
    "LadderPolynomial",
    "Mode",
    "ModeRegistry",
    "ModeforgeError",
    "StateVector",
    "UndefinedReductionError",
    "UsageError",
    "apply_ladder",
    "basis_state",
    "embed",
    "expectation",
    "inner",
    "mode",
    "one_body_operator",
    "partial_project",
    "restrict",
    "shift_occupation",
    "state_from_json",
    "state_to_json",
    "tensor",
    "vacuum",
    "variance",
]
