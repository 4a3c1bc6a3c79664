"""Exception types shared across the package."""


class TwistDistError(Exception):
    """Base class for all package-specific errors."""


class MissingPrimeError(TwistDistError, KeyError):
    """A coefficient provider has no data for a requested prime."""

    def __init__(self, p: int):
        super().__init__(p)
        self.p = p

    def __str__(self) -> str:
        return f"no Satake data for prime {self.p}"


class SatakeFileError(TwistDistError, ValueError):
    """Malformed Satake parameter file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CoverageError(TwistDistError, ValueError):
    """A random assignment or provider does not cover the requested primes."""


class BudgetExceededError(TwistDistError, RuntimeError):
    """Exact moment enumeration would exceed its tuple budget."""


class GridCoverageError(TwistDistError, ValueError):
    """A characteristic-function grid does not cover the requested box."""


class InsufficientDecayError(TwistDistError, ValueError):
    """Characteristic function too large at the inversion boundary."""


class EmptySampleError(TwistDistError, ValueError):
    """An operation received an empty sample set."""


class DimensionMismatchError(TwistDistError, ValueError):
    """Sample sets with incompatible dimension flags."""


class SingularFactorError(TwistDistError, ValueError):
    """A local Euler factor has a pole (|alpha_j| >= p)."""
