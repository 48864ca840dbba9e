"""Exception hierarchy shared by the library and the command line front-end."""


class PolaritonixError(Exception):
    """Base class for all errors raised by polaritonix."""


class DomainError(PolaritonixError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class CriticalDampingError(DomainError):
    """Quality factor equals 1/2, where the pole formulas are singular."""


class ConfigurationError(PolaritonixError, ValueError):
    """Physical parameters that do not describe a dissipative system."""


class NoPeaksError(PolaritonixError):
    pass


class OverlappingPeaksError(PolaritonixError):
    """A half-maximum crossing is missing on one side of a peak."""


class AmbiguousSplittingError(PolaritonixError):
    """More than two dominant peaks, so the Rabi splitting is ill defined."""

    def __init__(self, message, n_peaks=None, detuning=None):
        super().__init__(message)
        self.n_peaks = n_peaks
        self.detuning = detuning


class NoSplittingError(PolaritonixError):
    """Fewer than two peaks anywhere in the scanned detuning range."""


class NotBracketedError(PolaritonixError):
    pass


class IllConditionedError(DomainError):
    """The Lorentzian series cancels beyond what extended precision can hold."""
