"""Geometry kernel for the three constant-curvature surfaces.

Points, tangent directions, geodesics, isometries and metric queries for
the euclidean plane, the round sphere and the hyperbolic plane.  Each
model gets a linear matrix representation so that composing reflections
is always a 3x3 matrix product:

* euclidean plane  -- affine R^2, isometries as homogeneous 3x3 matrices,
* sphere           -- unit vectors in R^3, isometries in O(3),
* hyperbolic plane -- upper hyperboloid sheet in R^{2,1}, isometries in O(2,1).

All objects are immutable after construction and every operation is a
pure function, so values can be shared freely between workers.

Tolerances: 1e-12 for type invariants, 1e-10 for group identities,
1e-9 for composed geometric predicates (one decade of headroom per
composition layer).
"""

from __future__ import annotations

import enum
import math

from .errors import (
    BasePointMismatchError,
    DomainError,
    GeometryError,
    InvalidGeodesicError,
    ModelMismatchError,
)

TOL_TYPE = 1e-12
TOL_GROUP = 1e-10
TOL_GEOM = 1e-9


class Model(enum.Enum):
    """Curvature model; the enum value is the curvature."""

    EUCLIDEAN = 0
    SPHERICAL = 1
    HYPERBOLIC = -1

    @property
    def curvature(self) -> int:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "Model":
        key = name.strip().lower()
        table = {
            "euclidean": cls.EUCLIDEAN,
            "spherical": cls.SPHERICAL,
            "hyperbolic": cls.HYPERBOLIC,
        }
        if key not in table:
            raise DomainError(f"unknown model name: {name!r}")
        return table[key]


# ---------------------------------------------------------------------------
# raw tuple kernels (package internal; hot paths avoid object overhead)

def _dot2(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _cross2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _ldot(a, b):
    """Lorentz inner product of signature (+,+,-)."""
    return a[0] * b[0] + a[1] * b[1] - a[2] * b[2]


def _cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _det3(a, b, c):
    return _dot3(a, _cross3(b, c))


def _mat3_vec(m, v):
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def _mat3_mul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


_ID3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def _normalize3(v):
    n = math.sqrt(_dot3(v, v))
    return (v[0] / n, v[1] / n, v[2] / n)


def _normalize2(v):
    n = math.hypot(v[0], v[1])
    return (v[0] / n, v[1] / n)


def _lnormalize_spacelike(v):
    n = math.sqrt(_ldot(v, v))
    return (v[0] / n, v[1] / n, v[2] / n)


def _lnormalize_timelike(v):
    n = math.sqrt(-_ldot(v, v))
    v = (v[0] / n, v[1] / n, v[2] / n)
    if v[2] < 0:
        v = (-v[0], -v[1], -v[2])
    return v


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def _renorm_point_raw(model, p):
    if model is Model.EUCLIDEAN:
        return p
    if model is Model.SPHERICAL:
        return _normalize3(p)
    return _lnormalize_timelike(p)


def _renorm_dir_raw(model, p, v):
    """Project v onto the tangent space at p and normalize."""
    if model is Model.EUCLIDEAN:
        return _normalize2(v)
    if model is Model.SPHERICAL:
        s = _dot3(v, p)
        v = (v[0] - s * p[0], v[1] - s * p[1], v[2] - s * p[2])
        return _normalize3(v)
    s = _ldot(v, p)
    v = (v[0] + s * p[0], v[1] + s * p[1], v[2] + s * p[2])
    return _lnormalize_spacelike(v)


def _distance_raw(model, p, q):
    if model is Model.EUCLIDEAN:
        return math.hypot(q[0] - p[0], q[1] - p[1])
    if model is Model.SPHERICAL:
        # robust near 0 and pi
        chord = math.sqrt(
            (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 + (q[2] - p[2]) ** 2
        )
        return 2.0 * math.asin(_clamp(0.5 * chord, 0.0, 1.0))
    # robust near zero: <p-q, p-q>_L = 2(cosh d - 1) = 4 sinh^2(d/2)
    w = (q[0] - p[0], q[1] - p[1], q[2] - p[2])
    s2 = _ldot(w, w)
    return 2.0 * math.asinh(0.5 * math.sqrt(s2)) if s2 > 0.0 else 0.0


def _geodesic_raw(model, p, v, t):
    """Point and transported forward direction at arc length t."""
    if model is Model.EUCLIDEAN:
        return (p[0] + t * v[0], p[1] + t * v[1]), v
    if model is Model.SPHERICAL:
        c, s = math.cos(t), math.sin(t)
        q = (c * p[0] + s * v[0], c * p[1] + s * v[1], c * p[2] + s * v[2])
        w = (-s * p[0] + c * v[0], -s * p[1] + c * v[1], -s * p[2] + c * v[2])
        return q, w
    c, s = math.cosh(t), math.sinh(t)
    q = (c * p[0] + s * v[0], c * p[1] + s * v[1], c * p[2] + s * v[2])
    w = (s * p[0] + c * v[0], s * p[1] + c * v[1], s * p[2] + c * v[2])
    return q, w


def _initial_tangent_raw(model, p, q):
    """(distance, unit tangent at p of the minimizing geodesic p -> q).

    Raises GeometryError when the tangent is undefined (coincident or,
    on the sphere, antipodal endpoints).
    """
    d = _distance_raw(model, p, q)
    if model is Model.EUCLIDEAN:
        if d < TOL_TYPE:
            raise GeometryError("coincident points have no direction")
        return d, ((q[0] - p[0]) / d, (q[1] - p[1]) / d)
    if model is Model.SPHERICAL:
        if d < TOL_TYPE or math.pi - d < TOL_TYPE:
            raise GeometryError("direction undefined (coincident/antipodal)")
        c = math.cos(d)
        w = (q[0] - c * p[0], q[1] - c * p[1], q[2] - c * p[2])
        return d, _normalize3(w)
    if d < TOL_TYPE:
        raise GeometryError("coincident points have no direction")
    c = math.cosh(d)
    w = (q[0] - c * p[0], q[1] - c * p[1], q[2] - c * p[2])
    return d, _lnormalize_spacelike(w)


def _frame_raw(model, p):
    """A positively oriented orthonormal tangent frame at p."""
    if model is Model.EUCLIDEAN:
        return (1.0, 0.0), (0.0, 1.0)
    if model is Model.SPHERICAL:
        ref = (0.0, 0.0, 1.0) if abs(p[2]) < 0.9 else (1.0, 0.0, 0.0)
        s = _dot3(ref, p)
        e1 = _normalize3((ref[0] - s * p[0], ref[1] - s * p[1], ref[2] - s * p[2]))
        e2 = _cross3(p, e1)
        return e1, e2
    ref = (1.0, 0.0, 0.0)
    s = _ldot(ref, p)
    w = (ref[0] + s * p[0], ref[1] + s * p[1], ref[2] + s * p[2])
    if _ldot(w, w) < 1e-12:
        ref = (0.0, 1.0, 0.0)
        s = _ldot(ref, p)
        w = (ref[0] + s * p[0], ref[1] + s * p[1], ref[2] + s * p[2])
    e1 = _lnormalize_spacelike(w)
    # lorentz complement of span{p, e1} is J (p x e1)
    cx = _cross3(p, e1)
    e2 = _lnormalize_spacelike((cx[0], cx[1], -cx[2]))
    # fix orientation: det[p, e1, e2] > 0
    if _det3(p, e1, e2) < 0:
        e2 = (-e2[0], -e2[1], -e2[2])
    return e1, e2


def _oriented_angle_raw(model, p, a, b):
    """Counterclockwise angle from tangent a to tangent b at p, in [0, 2pi)."""
    if model is Model.EUCLIDEAN:
        ang = math.atan2(_cross2(a, b), _dot2(a, b))
    elif model is Model.SPHERICAL:
        ang = math.atan2(_det3(p, a, b), _dot3(a, b))
    else:
        ang = math.atan2(_det3(p, a, b), _ldot(a, b))
    return ang % (2.0 * math.pi)


def _reflect_matrix_raw(model, p, u):
    """Matrix of the reflection across the geodesic through p with tangent u."""
    if model is Model.EUCLIDEAN:
        nx, ny = -u[1], u[0]
        d = nx * p[0] + ny * p[1]
        return (
            (1.0 - 2.0 * nx * nx, -2.0 * nx * ny, 2.0 * d * nx),
            (-2.0 * nx * ny, 1.0 - 2.0 * ny * ny, 2.0 * d * ny),
            (0.0, 0.0, 1.0),
        )
    if model is Model.SPHERICAL:
        n = _normalize3(_cross3(p, u))
        return tuple(
            tuple((1.0 if i == j else 0.0) - 2.0 * n[i] * n[j] for j in range(3))
            for i in range(3)
        )
    w = _cross3(p, u)
    # lorentz normal of the plane spanned by {p, u} is J (p x u)
    m = _lnormalize_spacelike((w[0], w[1], -w[2]))
    # lorentz reflection: x -> x - 2 <x,m>_L m   with <m,m>_L = 1
    jm = (m[0], m[1], -m[2])
    return tuple(
        tuple((1.0 if i == j else 0.0) - 2.0 * m[i] * jm[j] for j in range(3))
        for i in range(3)
    )


def _apply_point_raw(model, mat, p):
    if model is Model.EUCLIDEAN:
        return (
            mat[0][0] * p[0] + mat[0][1] * p[1] + mat[0][2],
            mat[1][0] * p[0] + mat[1][1] * p[1] + mat[1][2],
        )
    return _renorm_point_raw(model, _mat3_vec(mat, p))


def _apply_vec_raw(model, mat, v):
    if model is Model.EUCLIDEAN:
        return (
            mat[0][0] * v[0] + mat[0][1] * v[1],
            mat[1][0] * v[0] + mat[1][1] * v[1],
        )
    return _mat3_vec(mat, v)


def _mat_inverse_raw(model, mat):
    if model is Model.EUCLIDEAN:
        a, b, tx = mat[0]
        c, d, ty = mat[1]
        det = a * d - b * c
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        return (
            (ia, ib, -(ia * tx + ib * ty)),
            (ic, id_, -(ic * tx + id_ * ty)),
            (0.0, 0.0, 1.0),
        )
    if model is Model.SPHERICAL:
        return tuple(tuple(mat[j][i] for j in range(3)) for i in range(3))
    # O(2,1): inverse = J M^T J with J = diag(1,1,-1)
    j = (1.0, 1.0, -1.0)
    return tuple(
        tuple(j[i] * mat[k][i] * j[k] for k in range(3)) for i in range(3)
    )


# ---------------------------------------------------------------------------
# public objects


class Point:
    """A point of the model surface.

    coords is an (x, y) pair for the euclidean plane, a unit 3-vector for
    the sphere, and an upper-sheet hyperboloid 3-vector for the
    hyperbolic plane.
    """

    __slots__ = ("model", "coords")

    def __init__(self, model: Model, coords, *, _checked: bool = False):
        coords = tuple(float(c) for c in coords)
        if not _checked:
            if model is Model.EUCLIDEAN:
                if len(coords) != 2:
                    raise GeometryError("euclidean points are (x, y) pairs")
            elif model is Model.SPHERICAL:
                if len(coords) != 3 or abs(_dot3(coords, coords) - 1.0) > TOL_TYPE:
                    raise GeometryError("spherical points must be unit 3-vectors")
            else:
                if (
                    len(coords) != 3
                    or abs(_ldot(coords, coords) + 1.0) > TOL_TYPE
                    or coords[2] <= 0
                ):
                    raise GeometryError(
                        "hyperbolic points must lie on the upper hyperboloid sheet"
                    )
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, *a):
        raise AttributeError("Point is immutable")

    def __reduce__(self):
        return (Point, (self.model, self.coords))

    @classmethod
    def normalized(cls, model: Model, coords) -> "Point":
        """Build a Point after projecting coords back onto the model surface."""
        coords = tuple(float(c) for c in coords)
        if model is not Model.EUCLIDEAN:
            coords = _renorm_point_raw(model, coords)
        return cls(model, coords, _checked=True)

    def __repr__(self):
        xs = ", ".join(f"{c:.6g}" for c in self.coords)
        return f"Point({self.model.name.lower()}, ({xs}))"


class Direction:
    """A unit tangent vector at a base point."""

    __slots__ = ("model", "base", "vec")

    def __init__(self, base: Point, vec, *, _checked: bool = False):
        vec = tuple(float(c) for c in vec)
        model = base.model
        if not _checked:
            if model is Model.EUCLIDEAN:
                if len(vec) != 2 or abs(math.hypot(*vec) - 1.0) > TOL_TYPE:
                    raise GeometryError("direction must be a unit 2-vector")
            elif model is Model.SPHERICAL:
                if (
                    len(vec) != 3
                    or abs(_dot3(vec, vec) - 1.0) > TOL_TYPE
                    or abs(_dot3(vec, base.coords)) > TOL_TYPE
                ):
                    raise GeometryError("direction must be unit and tangent")
            else:
                if (
                    len(vec) != 3
                    or abs(_ldot(vec, vec) - 1.0) > TOL_TYPE
                    or abs(_ldot(vec, base.coords)) > TOL_TYPE
                ):
                    raise GeometryError("direction must be unit and tangent")
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "vec", vec)

    def __setattr__(self, *a):
        raise AttributeError("Direction is immutable")

    def __reduce__(self):
        return (Direction, (self.base, self.vec))

    @classmethod
    def normalized(cls, base: Point, vec) -> "Direction":
        return cls(base, _renorm_dir_raw(base.model, base.coords, vec), _checked=True)

    @classmethod
    def from_angle(cls, base: Point, theta: float, frame=None) -> "Direction":
        """Direction cos(theta) e1 + sin(theta) e2 in the frame at base."""
        if frame is None:
            frame = _frame_raw(base.model, base.coords)
        e1, e2 = frame
        c, s = math.cos(theta), math.sin(theta)
        vec = tuple(c * a + s * b for a, b in zip(e1, e2))
        return cls.normalized(base, vec)

    @property
    def angle(self) -> float:
        """Planar angle in [0, 2pi); euclidean model only."""
        if self.model is not Model.EUCLIDEAN:
            raise ModelMismatchError("angle coordinate is euclidean-only")
        return math.atan2(self.vec[1], self.vec[0]) % (2.0 * math.pi)

    def reversed(self) -> "Direction":
        return Direction(self.base, tuple(-c for c in self.vec), _checked=True)

    def __repr__(self):
        xs = ", ".join(f"{c:.6g}" for c in self.vec)
        return f"Direction(({xs}) at {self.base!r})"


class GeodesicSegment:
    """Oriented geodesic segment: start point, direction, arc length."""

    __slots__ = ("model", "start", "direction", "length")

    def __init__(self, start: Point, direction: Direction, length: float):
        if direction.base is not start and _distance_raw(
            start.model, start.coords, direction.base.coords
        ) > TOL_GEOM:
            raise BasePointMismatchError("segment direction must be based at start")
        length = float(length)
        if length < 0:
            raise GeometryError("segment length must be nonnegative")
        object.__setattr__(self, "model", start.model)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "length", length)

    def __setattr__(self, *a):
        raise AttributeError("GeodesicSegment is immutable")

    def __reduce__(self):
        return (GeodesicSegment, (self.start, self.direction, self.length))

    @property
    def end(self) -> Point:
        p, _ = _geodesic_raw(
            self.model, self.start.coords, self.direction.vec, self.length
        )
        return Point.normalized(self.model, p)

    def point_at(self, t: float) -> Point:
        p, _ = _geodesic_raw(self.model, self.start.coords, self.direction.vec, t)
        return Point.normalized(self.model, p)

    def __repr__(self):
        return f"GeodesicSegment({self.start!r}, len={self.length:.6g})"


class Isometry:
    """Rigid motion of the model, direct or reflecting."""

    __slots__ = ("model", "matrix", "reflecting")

    def __init__(self, model: Model, matrix, reflecting: bool):
        matrix = tuple(tuple(float(x) for x in row) for row in matrix)
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "reflecting", bool(reflecting))

    def __setattr__(self, *a):
        raise AttributeError("Isometry is immutable")

    def __reduce__(self):
        return (Isometry, (self.model, self.matrix, self.reflecting))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def inverse(self) -> "Isometry":
        return Isometry(
            self.model, _mat_inverse_raw(self.model, self.matrix), self.reflecting
        )

    def __repr__(self):
        tag = "reflecting" if self.reflecting else "direct"
        return f"Isometry({self.model.name.lower()}, {tag})"


# ---------------------------------------------------------------------------
# operations


def identity(model: Model) -> Isometry:
    return Isometry(model, _ID3, False)


def compose(g: Isometry, h: Isometry) -> Isometry:
    """g after h."""
    if g.model is not h.model:
        raise ModelMismatchError("cannot compose isometries of different models")
    return Isometry(
        g.model, _mat3_mul(g.matrix, h.matrix), g.reflecting ^ h.reflecting
    )


def reflect(model: Model, mirror: GeodesicSegment) -> Isometry:
    """Reflection across the full geodesic through ``mirror``."""
    if mirror.model is not model:
        raise ModelMismatchError("mirror belongs to a different model")
    if mirror.length <= 0:
        raise InvalidGeodesicError("zero-length mirror does not determine a geodesic")
    mat = _reflect_matrix_raw(model, mirror.start.coords, mirror.direction.vec)
    return Isometry(model, mat, True)


def apply(iso: Isometry, obj):
    """Apply an isometry to a Point, Direction, or GeodesicSegment."""
    if isinstance(obj, Point):
        if obj.model is not iso.model:
            raise ModelMismatchError("isometry and point models differ")
        return Point.normalized(iso.model, _apply_point_raw(iso.model, iso.matrix, obj.coords))
    if isinstance(obj, Direction):
        if obj.model is not iso.model:
            raise ModelMismatchError("isometry and direction models differ")
        base = apply(iso, obj.base)
        vec = _apply_vec_raw(iso.model, iso.matrix, obj.vec)
        return Direction.normalized(base, vec)
    if isinstance(obj, GeodesicSegment):
        start = apply(iso, obj.start)
        direction = apply(iso, obj.direction)
        return GeodesicSegment(start, Direction.normalized(start, direction.vec), obj.length)
    raise TypeError(f"cannot apply isometry to {type(obj).__name__}")


def geodesic_point_at(model: Model, start: Point, direction: Direction, t: float):
    """Exponential map: point at arc length t plus the transported direction."""
    if start.model is not model or direction.model is not model:
        raise ModelMismatchError("start/direction belong to a different model")
    if t < 0:
        raise DomainError("arc length must be nonnegative")
    p, v = _geodesic_raw(model, start.coords, direction.vec, t)
    point = Point.normalized(model, p)
    return point, Direction.normalized(point, v)


def distance(model: Model, p: Point, q: Point) -> float:
    if p.model is not model or q.model is not model:
        raise ModelMismatchError("points belong to a different model")
    return _distance_raw(model, p.coords, q.coords)


def angle_between(dir_a: Direction, dir_b: Direction) -> float:
    """Oriented (counterclockwise) angle from dir_a to dir_b, in [0, 2pi)."""
    if dir_a.model is not dir_b.model:
        raise ModelMismatchError("directions belong to different models")
    if _distance_raw(dir_a.model, dir_a.base.coords, dir_b.base.coords) > TOL_GEOM:
        raise BasePointMismatchError("directions must share a base point")
    return _oriented_angle_raw(dir_a.model, dir_a.base.coords, dir_a.vec, dir_b.vec)


def pullback_density(model: Model, t: float) -> float:
    """Density of the exponential-map pullback of the area measure.

    t for the plane, sinh(t) for the hyperbolic plane, \\|sin(t)\\| for the
    sphere; this single function drives every closed-form average.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if model is Model.EUCLIDEAN:
        return t
    if model is Model.HYPERBOLIC:
        return math.sinh(t)
    return abs(math.sin(t))


def segment_between(model: Model, p: Point, q: Point) -> GeodesicSegment:
    """Minimizing geodesic segment from p to q (short arc on the sphere)."""
    d, v = _initial_tangent_raw(model, p.coords, q.coords)
    return GeodesicSegment(p, Direction(p, v, _checked=True), d)


def orthonormal_frame(point: Point):
    """Positively oriented orthonormal tangent frame (e1, e2) at point."""
    e1, e2 = _frame_raw(point.model, point.coords)
    return (
        Direction(point, e1, _checked=True),
        Direction(point, e2, _checked=True),
    )


def euclidean_rotation(center, angle: float) -> Isometry:
    """Planar rotation by ``angle`` about ``center`` (an (x, y) pair or Point)."""
    if isinstance(center, Point):
        center = center.coords
    cx, cy = center
    c, s = math.cos(angle), math.sin(angle)
    return Isometry(
        Model.EUCLIDEAN,
        (
            (c, -s, cx - c * cx + s * cy),
            (s, c, cy - s * cx - c * cy),
            (0.0, 0.0, 1.0),
        ),
        False,
    )
