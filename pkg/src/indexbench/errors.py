"""Exception hierarchy shared by all modules."""


class IndexbenchError(Exception):
    """Base class for all errors raised by this package."""


class ContextError(IndexbenchError):
    """Dimension mismatch or an operator not affiliated with its context."""


class StructuralError(IndexbenchError):
    """Chains mixing contexts or malformed term structure."""


class ParameterError(IndexbenchError):
    """Out-of-range or inconsistent numeric parameters."""


class ValidationError(IndexbenchError):
    """An operator fails a structural precondition (self-adjointness, ...)."""


class LevelError(IndexbenchError):
    """A cochain was paired with a chain of an unsupported level."""


class CapError(IndexbenchError):
    """A cost cap would be exceeded; pass allow_large=True to accept the cost."""


class InvertibilityError(IndexbenchError):
    """The operator has (numerically) vanishing eigenvalues.

    The usual remedy is double(): it embeds the module into a doubled one
    whose operator is invertible without changing any pairing.
    """


class RefinementError(IndexbenchError):
    """A discretized path is too coarse for unambiguous eigenvalue tracking."""


class ScenarioError(IndexbenchError):
    """Scenario file failed to parse or validate; message names the field."""
