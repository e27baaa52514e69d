"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, PreconditionError -> 3,
CertificationError -> 4, InternalConsistencyError -> 5.
"""


class FockspecError(Exception):
    """Base class for all package errors."""


class ConfigError(FockspecError):
    """Malformed configuration or input file."""


class PreconditionError(FockspecError):
    """An operation's precondition does not hold (bad domain, arrangement, ...)."""


class UnsupportedArrangementError(PreconditionError):
    """Disc arrangement is neither disjoint nor laminar."""

    def __init__(self, disc_a, disc_b):
        self.pair = (disc_a, disc_b)
        super().__init__(
            f"discs {disc_a} and {disc_b} overlap in general position; "
            "only disjoint or nested (laminar) arrangements are supported"
        )


class NotPositiveDefiniteError(FockspecError):
    """Cholesky hit a nonpositive pivot; carries the failing leading dimension."""

    def __init__(self, dimension):
        self.dimension = dimension
        super().__init__(f"matrix is not positive definite at leading dimension {dimension}")


class ConvergenceError(FockspecError):
    """An iteration exceeded its budget; carries the residual it reached."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class CertificationError(FockspecError):
    """A requested quantity is below the rigorous certification threshold."""

    def __init__(self, message, tail_bound=None):
        self.tail_bound = tail_bound
        super().__init__(message)


class InternalConsistencyError(FockspecError):
    """Two independent computation routes disagree beyond tolerance."""
