"""Exception types shared across the package."""


class ExpDiffError(Exception):
    """Base class for all errors raised by expdiff."""


class InvalidDiffeo(ExpDiffError):
    """A displacement field does not define an orientation-preserving diffeomorphism."""


class NoConvergence(ExpDiffError):
    """An iterative solver (inversion, shooting) did not reach its tolerance.

    Shooting failures carry the Newton ``trace`` accumulated so far.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BlowUp(ExpDiffError):
    """The geodesic left the validity region (slope fell below the floor).

    ``t`` holds the time of the last valid state.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ShockFormed(ExpDiffError):
    """The Burgers characteristic map lost monotonicity."""


class ConfigError(ExpDiffError):
    """Malformed or inconsistent experiment configuration."""
