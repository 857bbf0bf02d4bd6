"""Exception hierarchy shared by all modules."""


class PurificationError(Exception):
    """Base class for every error raised by the package."""


class InvalidStateError(PurificationError, ValueError):
    """A matrix or vector violates density-matrix / pure-state invariants."""


class NormalizationError(InvalidStateError):
    """A pure state is not unit norm."""


class UnphysicalRMatrixError(InvalidStateError):
    """An R-picture matrix reconstructs to a non-PSD operator."""


class FilterAnnihilatesStateError(PurificationError):
    """A local filter has (numerically) zero success probability on the state."""


class NonDiagonalizableError(PurificationError):
    """The Lorentz normal form of R is not diagonal (Jordan-block case)."""


class DegenerateInputError(PurificationError, ValueError):
    """A closed-form expression is singular at the requested parameters."""


class ProtocolFailureError(PurificationError):
    """A probabilistic protocol round has (numerically) zero success probability."""


class ResolutionError(PurificationError, ValueError):
    """The time grid is too coarse for the cavity response."""


class TotalInternalReflectionError(PurificationError, ValueError):
    """No refracted ray exists for the given angle and indices."""


class UnreachableTargetError(PurificationError, ValueError):
    """A design target lies outside the achievable interval.

    Attributes
    ----------
    interval : tuple of float
        The achievable (low, high) range.
    """

    def __init__(self, message, interval):
        super().__init__(f"{message}; achievable interval is [{interval[0]:.6g}, {interval[1]:.6g}]")
        self.interval = interval
