"""Exception types shared across the package."""


class HybstabError(Exception):
    """Base class for package-specific errors."""


class NonFiniteOutput(HybstabError):
    """A model evaluation produced NaN or infinity."""


class F2Zero(HybstabError):
    """The input-channel factor f2 vanished; the model class forbids this."""


class ThetaOutOfRange(HybstabError, ValueError):
    """theta lies outside the interval on which the level constant exists."""


class DegenerateRegion(HybstabError):
    """A sampling region became empty after exclusions."""


class NoBracket(HybstabError):
    """Bisection endpoints do not bracket a sign change."""
