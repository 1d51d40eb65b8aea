"""Exception types shared across the package."""


class AngulateError(Exception):
    """Base class for all library errors."""


# -- planar primitives ------------------------------------------------------

class CollinearInput(AngulateError):
    """Three points are collinear where a proper triangle is required."""


class TooFewPoints(AngulateError):
    """A predicate was given fewer points than it needs."""


class DegenerateSource(AngulateError):
    """All source points of a similarity fit coincide."""


# -- measurements -----------------------------------------------------------

class CoincidentPoints(AngulateError):
    """A viewing angle was requested at a point coinciding with a target."""


class BasePoint(AngulateError):
    """The measurement map was evaluated at one of its base points."""


# -- surface interpolation --------------------------------------------------

class NonUniqueProfile(AngulateError):
    """Quadric interpolation did not pin down a single surface.

    Carries the solution-space dimension so callers can distinguish
    degenerate data (dimension > 1) from inconsistent data (dimension 0).
    """

    def __init__(self, dimension: int, message: str = ""):
        self.dimension = dimension
        super().__init__(message or f"interpolation dimension {dimension}, expected 1")


class TangentLine(AngulateError):
    """The diagonal line meets the quadric in a double point."""


class NonUnitChart(AngulateError):
    """Extracted chart coordinates are not unit-modulus; input is suspect."""


# -- reconstruction ---------------------------------------------------------

class TangentCircles(AngulateError):
    """The two resection circles meet only at the reference target."""


class OnCriticalCircle(AngulateError):
    """Resection attempted for a point on the circle through the three targets."""


class CriticalCircleWarning(UserWarning):
    """A resection result landed suspiciously close to the critical circle."""


class ParallelLines(AngulateError):
    """Forward intersection of two parallel sight lines."""


class DegenerateSubset(AngulateError):
    """A target subset needed by point identification has a non-unique profile."""


class InconsistentAngles(AngulateError):
    """Reconstructed points fail to reproduce the input angles."""


class NoSolutionFound(AngulateError):
    """Every numeric restart failed to converge."""

    def __init__(self, message: str, best_residual: float = float("inf")):
        self.best_residual = best_residual
        super().__init__(message)


class ValidationFailed(AngulateError):
    """A consistency witness exceeded its tolerance."""


# -- ambiguity analysis -----------------------------------------------------

class Cocircular(AngulateError):
    """The four points lie on one circle, so the construction degenerates."""


class CollinearTriple(AngulateError):
    """Three of the four quadrilateral vertices are collinear."""


class OnExceptionalCurve(AngulateError):
    """The query point lies on a fundamental circle, where the twin map blows down."""


class QuotientNotSign(AngulateError):
    """A directed-angle quotient was not numerically close to +1 or -1."""


# -- batch front door -------------------------------------------------------

class InvalidShape(AngulateError):
    """A scenario shape (t, m) outside the supported range."""


class UnplottableReport(AngulateError):
    """The report carries no point data that could be drawn."""
