"""Exception types raised by skewfold."""


class SkewfoldError(Exception):
    pass


class ConfigurationError(SkewfoldError, ValueError):
    """Invalid parameters or configuration, detected before any simulation."""


class DomainError(SkewfoldError, ValueError):
    """Input path violates an operation's precondition (sign, monotonicity...)."""


class GridMismatchError(SkewfoldError, ValueError):
    """Two paths that must share a time grid do not."""
