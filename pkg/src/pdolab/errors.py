"""Exception hierarchy shared by every pdolab module."""


class PdoError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(PdoError, ValueError):
    pass


class DimensionMismatchError(PdoError, ValueError):
    pass


class NotHermitianError(PdoError, ValueError):
    pass


class TraceError(PdoError, ValueError):
    pass


class UnknownEventError(PdoError, KeyError):
    pass


class SizeCapError(PdoError, ValueError):
    pass


class IncompatibleError(PdoError):
    """Marginals disagree on an overlap.

    ``pair`` names the offending parts, ``deviation`` is the largest
    entrywise disagreement of their reduced tensors.
    """

    def __init__(self, message, pair=None, deviation=None):
        super().__init__(message)
        self.pair = pair
        self.deviation = deviation


class NotFoundError(PdoError):
    """A bounded search ended without a hit (never a nonexistence proof)."""


class NotChordalError(PdoError, ValueError):
    pass


class ZeroSeparatorError(PdoError, ValueError):
    pass


class NotTracePreservingError(PdoError, ValueError):
    pass


class NoMarginalChannelError(PdoError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoSteadyStateError(PdoError):
    pass


class NumericalError(PdoError, ArithmeticError):
    pass


class SupportError(PdoError, ValueError):
    """A free-parameter tensor touches entries fixed by the marginals."""


class IncompleteBasisError(PdoError, ValueError):
    """Local projectors are not a complete orthonormal rank-1 set."""
