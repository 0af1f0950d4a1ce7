"""Exception types raised by the library."""


class CompcosError(Exception):
    """Base class for all library errors."""


class NotPositiveDefinite(CompcosError, ValueError):
    """A Cholesky pivot fell below the positive-definiteness floor."""


class RankDeficient(NotPositiveDefinite):
    """An n x m matrix does not have full column rank."""


class InvalidDimensions(CompcosError, ValueError):
    pass


class DimensionsTooSmall(InvalidDimensions):
    """H-polynomials of the requested shape cannot be constructed (2m > n)."""


class PoleAtNonPositiveInteger(CompcosError, ValueError):
    pass


class ConvergenceDomain(CompcosError, ValueError):
    """The multi-index lies outside the region of absolute convergence."""


class QuadratureNotConverged(CompcosError, RuntimeError):
    pass


class ThresholdNotMet(CompcosError, RuntimeError):
    """No sampled frame had |P(u)| above the Rayleigh-quotient threshold."""
