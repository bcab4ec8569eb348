"""Exception hierarchy shared across the package.

Two failure classes matter to callers (and map to distinct CLI exit codes):
geometric hypotheses that the input data simply does not satisfy, and
numerical failures encountered while solving for a metric that should exist.
"""


class QemError(Exception):
    """Base class for all package errors."""


class InputError(QemError):
    """Malformed input data (bad JSON document, invalid field values)."""


class HypothesisError(QemError):
    """A geometric hypothesis of the construction fails for the given data."""


class NumericalError(QemError):
    """A numerical step failed (no root bracket, negative discriminant, ...)."""
