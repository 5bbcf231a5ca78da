"""Exception taxonomy shared across the package.

CLI exit codes map onto these: ConfigurationError (and subclasses) exit
with 2, NumericDomainError with 3.
"""


class ConfigurationError(ValueError):
    """Invalid setup: bad bindings, mismatched layouts, malformed input."""


class PreconditionError(ConfigurationError):
    """An operation was applied to a state that violates its precondition."""


class InconsistentOutcomeError(ConfigurationError):
    """A measurement record that no basis input can produce."""


class NumericDomainError(ArithmeticError):
    """Parameter set outside the numeric domain of a formula (e.g. zero denominator)."""
