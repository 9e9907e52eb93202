"""Exception types shared across the package."""


class BilliardError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(BilliardError, ValueError):
    """A geometric object violates its defining invariants."""


class ModelMismatchError(GeometryError):
    """Objects from different curvature models were combined."""


class InvalidGeodesicError(GeometryError):
    """A degenerate segment cannot determine a geodesic."""


class BasePointMismatchError(GeometryError):
    """Two tangent directions do not share a base point."""


class DomainError(BilliardError, ValueError):
    """Numeric argument outside the documented domain."""


class PolygonValidationError(BilliardError, ValueError):
    """Base class for polygon validation failures."""


class RepeatedVertexError(PolygonValidationError):
    pass


class SelfIntersectionError(PolygonValidationError):
    pass


class ZeroAngleError(PolygonValidationError):
    pass


class OverlongSphericalSideError(PolygonValidationError):
    pass


class OrientationError(PolygonValidationError):
    pass


class NestedObstacleError(PolygonValidationError):
    pass


class ObstaclePlacementError(PolygonValidationError):
    pass


class InconsistentPolygonError(BilliardError):
    """Angle/area identity residual exceeded the tolerance."""


class IntegrityError(BilliardError):
    """Internal invariant failed (e.g. a ray escaped a valid polygon)."""


class UnfoldingIntegrityError(IntegrityError):
    """An unfolded orbit deviates from a single geodesic."""


class BudgetExceededError(BilliardError):
    """The beam/tile cap was hit.

    ``partial`` carries whatever results were computed before the cap;
    callers may report them flagged as incomplete.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ExceptionalBasepointError(BilliardError):
    """Transversality fails at this base point (e.g. a corner image is
    antipodal to it on the sphere).  Measure zero; callers resample."""

    def __init__(self, message, corner=None, word=None):
        super().__init__(message)
        self.corner = corner
        self.word = word


class ExceptionalDirectionError(BilliardError):
    """The chosen direction is parallel to a side.  Measure zero."""


class InvalidBaseError(BilliardError, ValueError):
    """A boundary base point sits on (or too close to) a corner."""


class DegenerateViewError(BilliardError, ValueError):
    """The viewpoint lies on the curve whose optical length is requested."""


class NotPunctureError(BilliardError, ValueError):
    """A puncture point does not lie on the graph."""
