"""Exception types shared across the package."""


class ModeforgeError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ModeforgeError):
    """A registry or protocol setup is structurally invalid."""


class UsageError(ModeforgeError):
    """Operands violate an operation's contract (registry mismatch, wrong sector, ...)."""


class DomainError(ModeforgeError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class UndefinedReductionError(ModeforgeError):
    """A conditional state or reduction has no support (vanishing denominator)."""
