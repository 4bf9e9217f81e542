"""Exception types shared across the package."""


class ConehullError(Exception):
    """Base class for all conehull errors."""


class DegenerateInput(ConehullError):
    """Input lies in a lower-dimensional affine subspace or is otherwise unusable."""


class TiedFirstCoordinate(ConehullError):
    """Two hull vertices share a first coordinate exactly (probability-zero event)."""


class OriginNotInterior(ConehullError):
    """The origin is not strictly interior to the body, but the operation needs it."""


class NonGeneric(ConehullError):
    """Input is within tolerance of a degenerate position; exact counts would be unreliable."""


class NotPointed(ConehullError):
    """The cone contains a line; the requested quantity is undefined by convention."""


class SingularFrame(ConehullError):
    """Tangent frame requested at the singular point of the frame construction."""


class IterationCap(ConehullError):
    """A rejection or refinement loop exceeded its iteration budget."""


class EmptyWindow(ConehullError):
    """No complete cell was found inside the observation window."""


class ZeroVolume(ConehullError):
    """The polytope has (numerically) zero volume."""


class ConfigError(ConehullError):
    """An experiment configuration is invalid; the message names the field."""
