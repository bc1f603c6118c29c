"""Exception types shared across the package.

CLI exit codes: ConfigError -> 2, NumericalAbort -> 3, CapacityError -> 4.
"""


class CtrlVqeError(Exception):
    """Base class for package errors."""


class ConfigError(CtrlVqeError):
    """Invalid configuration, file contents, or argument combination."""


class CapacityError(CtrlVqeError):
    """Requested Hilbert-space dimension exceeds the configured cap."""


class DegeneracyError(CtrlVqeError):
    """Dressed-state assignment is ambiguous (overlap tie)."""


class SingularProjectionError(CtrlVqeError):
    """State has (numerically) no weight in the computational subspace."""


class NumericalAbort(CtrlVqeError):
    """Objective returned a non-finite value during optimization."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x
