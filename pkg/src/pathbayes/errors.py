"""Exception types raised by the filtering backends."""


class PathBayesError(Exception):
    """Base class for all package errors."""


class DeadPosteriorError(PathBayesError, ArithmeticError):
    """The (unnormalized) posterior mass underflowed or became non-finite."""


class GridMismatchError(PathBayesError, ValueError):
    """Two densities live on different grids."""


class GridTooSmallError(PathBayesError, ValueError):
    """A kernel's support does not fit inside the grid."""


class TruncationError(PathBayesError, ArithmeticError):
    """A finite Hermite/Fock basis cannot resolve the state."""


class RangeError(PathBayesError, ValueError):
    """A time argument lies outside the supported or observed range."""


class IncompatiblePotentialError(PathBayesError, ValueError):
    """A backend was asked to run with a potential it cannot handle."""


class VerificationError(PathBayesError, AssertionError):
    """A numerical identity check failed."""
