"""Exception and warning types shared across the package."""


class PoleError(ValueError):
    """A spectral parameter sits on the pole at 1 of a scattering factor."""


class AccuracyError(RuntimeError):
    """A numerical routine could not reach the requested accuracy.

    Carries the best value computed so far and its error estimate, when
    available, so callers can decide whether to accept a degraded result.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class DegeneratePointError(ValueError):
    """An evaluation point makes one of the identity denominators vanish.

    The identities are generic-point statements; resample and retry.
    """


class WindowTooSmallWarning(UserWarning):
    """A truncated summation window leaves a non-negligible tail."""
