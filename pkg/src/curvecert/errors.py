"""Exception types shared across the rigorous pipeline.

Every failure a check can report is a distinct type so certificates and
callers can tell "the math said no" apart from "the input was malformed".
"""


class RigorError(Exception):
    """Base class for failures of rigorous operations."""


class DomainViolation(RigorError):
    """Argument leaves the mathematical domain of the operation."""


class PrecisionExhausted(RigorError):
    """Context misconfigured: mixed precisions or unusably low precision."""


class DimensionMismatch(RigorError):
    """Vector/matrix shapes do not match the declared block signature."""


class SingularOrUnverifiable(RigorError):
    """A verified matrix inverse could not be certified."""


class RadiusCollapse(RigorError):
    """A propagated box radius became non-positive."""


class LeftAmbientBox(RigorError):
    """The image box does not fit inside the ambient unit box."""


class ConeSignLoss(RigorError):
    """A propagated cone coefficient lost its required sign."""


class UnsupportedSignature(RigorError):
    """The requested role swap needs a block the problem does not have."""


class MonotonicityUnverified(RigorError):
    """The fiber derivative interval contains zero over the region."""


class GapCollapse(RigorError):
    """Strip edges could not be kept rigorously apart.

    Carries ``step`` (1-based index along a chain, or strip id) and an
    optional ``chain`` id so negative tests can point at the failure.
    """

    def __init__(self, message, step=None, chain=None):
        super().__init__(message)
        self.step = step
        self.chain = chain


class GuessOutOfDomain(RigorError):
    """The non-rigorous curve guess is unusable (e.g. too close to x = 0)."""


class BranchInconsistent(RigorError):
    """An inverse-branch result contradicts the requested branch sign."""


class DegenerateOrbit(RigorError):
    """An orbit hit a point where the tangent dynamics degenerates."""


class NoSolution(RigorError):
    """A root-solving problem has no solution in the admissible range."""


class ConfigError(Exception):
    """Invalid run configuration (CLI/config-file level)."""
