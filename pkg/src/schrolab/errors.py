"""Exception types raised across the package."""


class SchrolabError(Exception):
    """Base class for all package errors."""


class ChartUndefined(SchrolabError):
    """The phase-space point lies in no chart valid for the requested radial set."""


class NotCharacteristic(SchrolabError):
    """A bicharacteristic seed does not satisfy |p| <= char_tol."""


class NoConvergence(SchrolabError):
    """Integration exhausted its step budget without classifying the endpoint."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class SupportViolation(SchrolabError):
    """A source term touches the boundary of the time window."""


class WindowTooSmall(SchrolabError):
    """The rays z = 2 t zeta leave the spatial box at the requested times."""


class DimensionMismatch(SchrolabError):
    """Generator and field kinds (or dimensions) do not match."""


class NoCounterpart(SchrolabError):
    """The spacetime generator has no data-side counterpart."""


class ConfigInvalid(SchrolabError):
    """The experiment configuration failed validation."""
