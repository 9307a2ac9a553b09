"""Exception and warning types raised by catsim."""


class CatsimError(Exception):
    """Base class for all catsim errors."""


class DimensionMismatch(CatsimError, ValueError):
    pass


class DefectiveMatrix(CatsimError):
    """Matrix is (numerically) not diagonalizable."""


class IllConditioned(CatsimError):
    """A metric failed its positive-definiteness check."""


class EmptySubset(CatsimError):
    pass


class PropagationOverflow(CatsimError, OverflowError):
    """Exponential growth factor would exceed the representable range."""


class ZeroState(CatsimError):
    pass


class ZeroProjection(CatsimError):
    pass


class GridTooCoarse(CatsimError):
    pass


class TruncationOverflow(CatsimError):
    """A coherent-state label fails the Fock-space fill gate."""


class NonAnalyticConstruction(CatsimError):
    pass


class BranchAmbiguity(CatsimError):
    pass


class NoConvergence(CatsimError):
    pass


class DegenerateOverlap(CatsimError):
    pass


class DegenerateReSpectrum(CatsimError):
    pass


class ConfigError(CatsimError):
    """Invalid scenario configuration."""


class UnboundedImaginaryWarning(UserWarning):
    pass


class ZeroCoefficientWarning(UserWarning):
    pass
