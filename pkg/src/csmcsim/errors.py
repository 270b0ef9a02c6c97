"""Exception types raised by the simulator."""


class CsmcError(Exception):
    """Base class for all errors raised by csmcsim."""


class DegenerateSigmaError(CsmcError, ValueError):
    """The sliding variable (or control) is too close to zero to have a direction."""


class InvalidDutyError(CsmcError, ValueError):
    """A zero duty cycle outside [0, 1)."""


class ConfigError(CsmcError, ValueError):
    """Invalid scenario configuration.

    ``field`` names the offending scenario key when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class RangeError(CsmcError, ValueError):
    """An analysis window that is not covered by the trace."""
