"""Exception hierarchy.

``ConfigError`` and its subclasses map to CLI exit code 1,
``NumericalError`` and its subclasses to exit code 2.
"""


class GapcountError(Exception):
    """Base class for all package errors."""


class ConfigError(GapcountError):
    """Invalid configuration or schema violation."""


class InvalidOperatorError(ConfigError):
    """Operator data violating a model invariant (e.g. a non-positive
    perturbed off-diagonal)."""


class NonSummableError(InvalidOperatorError):
    """Perturbation family whose first-order sum diverges, rejected unless
    explicitly overridden."""


class NumericalError(GapcountError):
    """Numerical failure (resolvent proximity, root finding, truncation)."""


class ResolventProximityError(NumericalError):
    """Requested resolvent energy too close to the spectrum."""


class RootFindingError(NumericalError):
    """Band-edge root finder failed to converge or missed a bracket."""


class WindowSizeError(NumericalError):
    """Truncation window too small for the requested tolerance."""


class ResonanceError(NumericalError):
    """Site 0 is resonant at the requested energy: |G(0,0)| below tolerance."""
