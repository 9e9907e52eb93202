"""Geodesic polygons with obstacles: validation, corner angles, the
combinatorial invariant kappa = p + 2q - 2, angle/area identities,
ray-boundary intersection and the Coxeter relation matrix.

A polygon is a list of boundary loops.  The first loop is the outer
boundary and must keep the table on its left (counterclockwise in the
plane); the remaining loops are obstacles traversed the other way round,
so the table is always to the left of the traversal.  Corner angles are
measured inside the table, reflex corners are allowed and convexity is
never assumed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from . import geom
from .errors import (
    InconsistentPolygonError,
    IntegrityError,
    NestedObstacleError,
    ObstaclePlacementError,
    OrientationError,
    OverlongSphericalSideError,
    PolygonValidationError,
    RepeatedVertexError,
    SelfIntersectionError,
    ZeroAngleError,
)
from .geom import (
    Model,
    Point,
    Direction,
    GeodesicSegment,
    Isometry,
    _clamp,
    _cross2,
    _cross3,
    _det3,
    _distance_raw,
    _dot2,
    _dot3,
    _frame_raw,
    _geodesic_raw,
    _initial_tangent_raw,
    _ldot,
    _lnormalize_spacelike,
    _lnormalize_timelike,
    _normalize3,
    _oriented_angle_raw,
    _reflect_matrix_raw,
)

TWO_PI = 2.0 * math.pi

CORNER_HIT_TOL = 1e-9
ANGLE_TOL = 1e-9
AREA_RESIDUAL_TOL = 1e-8
RATIONAL_ANGLE_MAX_DEN = 10**6


class BoundaryPoint(NamedTuple):
    """A point of the boundary: side index, offset s on that side, and the
    global arclength coordinate in [0, |dP|)."""

    side: int
    s: float
    arclength: float


class HitResult(NamedTuple):
    """First boundary feature met by a geodesic ray."""

    kind: str  # "side" | "corner"
    index: int  # side id or corner id
    t: float  # travel parameter
    s: float  # offset on the hit side (kind == "side")
    point: tuple  # raw coords of the hit point


class Corner(NamedTuple):
    index: int
    loop: int
    point: Point
    angle: float
    side_in: int  # side arriving at this corner
    side_out: int  # side leaving this corner


class Side(NamedTuple):
    index: int
    loop: int
    start_corner: int
    end_corner: int
    segment: GeodesicSegment
    length: float
    reflection: Isometry
    line: tuple  # per-model crossing data, see _side_line


def _side_line(model, a, u):
    """Precomputed data of the supporting geodesic through a with tangent u.

    euclidean:  (ax, ay, ux, uy, nx, ny, c) with line {x: n.x = c}
    spherical:  pole of the great circle
    hyperbolic: unit spacelike Lorentz normal of the plane
    """
    if model is Model.EUCLIDEAN:
        nx, ny = -u[1], u[0]
        return (a[0], a[1], u[0], u[1], nx, ny, nx * a[0] + ny * a[1])
    if model is Model.SPHERICAL:
        return _normalize3(_cross3(a, u))
    w = _cross3(a, u)
    return _lnormalize_spacelike((w[0], w[1], -w[2]))


class Polygon:
    """Validated geodesic polygon.  Immutable after construction."""

    def __init__(self, model, loops, corners, sides, area, angle_sum):
        self.model = model
        self.loops = loops  # list of lists of corner ids
        self.corners = corners  # list[Corner]
        self.sides = sides  # list[Side]
        self.area = area
        self.angle_sum = angle_sum
        self.num_corners = len(corners)
        self.num_obstacles = len(loops) - 1
        self.perimeter = sum(s.length for s in sides)
        offsets = []
        acc = 0.0
        for s in sides:
            offsets.append(acc)
            acc += s.length
        self.side_offsets = offsets
        self.diameter = 0.0
        pts = [c.point.coords for c in corners]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = _distance_raw(model, pts[i], pts[j])
                if d > self.diameter:
                    self.diameter = d

    # -- queries ------------------------------------------------------------

    def kappa(self) -> int:
        return self.num_corners + 2 * self.num_obstacles - 2

    def side_points(self, side_id: int):
        s = self.sides[side_id]
        return (
            self.corners[s.start_corner].point.coords,
            self.corners[s.end_corner].point.coords,
        )

    def boundary_point(self, arclength: float) -> BoundaryPoint:
        """Boundary point at a global arclength coordinate (mod perimeter)."""
        s_glob = arclength % self.perimeter
        for i, side in enumerate(self.sides):
            off = self.side_offsets[i]
            if s_glob < off + side.length or i == len(self.sides) - 1:
                return BoundaryPoint(i, s_glob - off, s_glob)
        raise IntegrityError("arclength lookup failed")

    def boundary_point_coords(self, bp: BoundaryPoint):
        side = self.sides[bp.side]
        p, v = _geodesic_raw(
            self.model,
            side.segment.start.coords,
            side.segment.direction.vec,
            bp.s,
        )
        return p, v  # point and side tangent at the point

    def point_in_table(self, coords) -> bool:
        """True when coords lies strictly inside the table region."""
        w = _loop_winding(self.model, self._loop_coords(0), coords)
        if w is None or abs(w - 1.0) > 0.25:
            return False
        for li in range(1, len(self.loops)):
            w = _loop_winding(self.model, self._loop_coords(li), coords)
            if w is None or abs(w) > 0.25:
                return False
        return True

    def distance_to_boundary(self, coords) -> float:
        return min(
            _point_segment_distance(
                self.model,
                coords,
                self.corners[s.start_corner].point.coords,
                self.corners[s.end_corner].point.coords,
                s.line,
            )
            for s in self.sides
        )

    def _loop_coords(self, loop_index):
        return [self.corners[ci].point.coords for ci in self.loops[loop_index]]

    def __repr__(self):
        return (
            f"Polygon({self.model.name.lower()}, corners={self.num_corners}, "
            f"obstacles={self.num_obstacles})"
        )


# ---------------------------------------------------------------------------
# construction / validation


def validate_polygon(loops: Sequence[Sequence[Sequence[float]]], model: Model) -> Polygon:
    """Build a Polygon from raw corner loops, checking every invariant.

    The first loop is the outer boundary; the rest are obstacles.  Raw
    coordinates are projected back onto the model surface before
    validation (guards against harmless serialization roundoff).
    """
    if not loops:
        raise PolygonValidationError("polygon needs at least one loop")
    loop_points = []
    for li, raw in enumerate(loops):
        if len(raw) < 3:
            raise PolygonValidationError(f"loop {li} has fewer than 3 corners")
        pts = [Point.normalized(model, c) for c in raw]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if _distance_raw(model, pts[i].coords, pts[j].coords) < 1e-12:
                    raise RepeatedVertexError(
                        f"loop {li}: corners {i} and {j} coincide"
                    )
        loop_points.append(pts)

    corners: list[Corner] = []
    sides: list[Side] = []
    loop_ids = []
    for li, pts in enumerate(loop_points):
        n = len(pts)
        base_cid = len(corners)
        base_sid = len(sides)
        loop_ids.append([base_cid + i for i in range(n)])
        for i in range(n):
            p, q = pts[i], pts[(i + 1) % n]
            try:
                seg = geom.segment_between(model, p, q)
            except Exception as exc:
                raise PolygonValidationError(f"loop {li}, side {i}: {exc}") from exc
            if model is Model.SPHERICAL and seg.length > math.pi - ANGLE_TOL:
                raise OverlongSphericalSideError(
                    f"loop {li}, side {i}: spherical side length {seg.length:.6f} >= pi"
                )
            line = _side_line(model, p.coords, seg.direction.vec)
            refl = geom.reflect(model, seg)
            sides.append(
                Side(
                    base_sid + i,
                    li,
                    base_cid + i,
                    base_cid + (i + 1) % n,
                    seg,
                    seg.length,
                    refl,
                    line,
                )
            )
        for i in range(n):
            v = pts[i]
            prev_pt = pts[(i - 1) % n]
            next_pt = pts[(i + 1) % n]
            _, to_next = _initial_tangent_raw(model, v.coords, next_pt.coords)
            _, to_prev = _initial_tangent_raw(model, v.coords, prev_pt.coords)
            ang = _oriented_angle_raw(model, v.coords, to_next, to_prev)
            if ang < ANGLE_TOL or ang > TWO_PI - ANGLE_TOL:
                raise ZeroAngleError(
                    f"loop {li}, corner {i}: angle {ang:.3e} is degenerate"
                )
            corners.append(
                Corner(
                    base_cid + i,
                    li,
                    v,
                    ang,
                    base_sid + (i - 1) % n,
                    base_sid + i,
                )
            )

    _check_simple(model, loop_ids, corners, sides)

    # signed areas fix orientation conventions; table area adds loops up
    signed = [
        _loop_signed_area(model, [c.coords for c in pts]) for pts in loop_points
    ]
    if model is Model.SPHERICAL:
        area_left = signed[0] if signed[0] > 0 else signed[0] + 4.0 * math.pi
        area = area_left
        for a in signed[1:]:
            obst = 4.0 * math.pi - (a if a > 0 else a + 4.0 * math.pi)
            area -= obst
    else:
        if signed[0] <= 1e-12:
            raise OrientationError(
                "outer loop must be counterclockwise (table on its left)"
            )
        area = signed[0]
        for li, a in enumerate(signed[1:], start=1):
            if a >= -1e-12:
                raise OrientationError(
                    f"obstacle loop {li} must be clockwise (table on its left)"
                )
            area += a
    if area <= 1e-12:
        raise PolygonValidationError("table region has nonpositive area")

    # obstacle containment / nesting
    for li in range(1, len(loop_points)):
        probe = loop_points[li][0].coords
        w = _loop_winding(model, [c.coords for c in loop_points[0]], probe)
        if w is None or abs(w - 1.0) > 0.25:
            raise ObstaclePlacementError(
                f"obstacle loop {li} lies outside the outer boundary"
            )
        for lj in range(1, len(loop_points)):
            if lj == li:
                continue
            w = _loop_winding(model, [c.coords for c in loop_points[lj]], probe)
            if w is not None and abs(w) > 0.25:
                raise NestedObstacleError(
                    f"obstacle loop {li} is nested inside obstacle loop {lj}"
                )

    angle_sum = sum(c.angle for c in corners)
    return Polygon(model, loop_ids, corners, sides, area, angle_sum)


def _check_simple(model, loop_ids, corners, sides):
    for i in range(len(sides)):
        for j in range(i + 1, len(sides)):
            si, sj = sides[i], sides[j]
            shared = {si.start_corner, si.end_corner} & {
                sj.start_corner,
                sj.end_corner,
            }
            if shared:
                continue  # adjacent sides meet at their common corner only
            a1 = corners[si.start_corner].point.coords
            a2 = corners[si.end_corner].point.coords
            b1 = corners[sj.start_corner].point.coords
            b2 = corners[sj.end_corner].point.coords
            if _segments_intersect(model, a1, a2, si, b1, b2, sj):
                if si.loop == sj.loop:
                    raise SelfIntersectionError(
                        f"loop {si.loop}: sides {si.index} and {sj.index} cross"
                    )
                raise ObstaclePlacementError(
                    f"loops {si.loop} and {sj.loop} intersect "
                    f"(sides {si.index}, {sj.index})"
                )


def kappa(polygon: Polygon) -> int:
    """p + 2q - 2 for p corners and q obstacles."""
    return polygon.kappa()


def angle_area_identity(polygon: Polygon):
    """(angle_sum, area, residual) of the model's Gauss-Bonnet identity.

    Angle sum comes straight from corner geometry, the area from signed
    fan triangulation; the residual of
        plane:       sum(alpha) - kappa*pi
        sphere:      sum(alpha) - (area + kappa*pi)
        hyperbolic:  sum(alpha) - (kappa*pi - area)
    must stay below 1e-8.
    """
    k = polygon.kappa()
    a = polygon.angle_sum
    ar = polygon.area
    if polygon.model is Model.EUCLIDEAN:
        residual = a - k * math.pi
    elif polygon.model is Model.SPHERICAL:
        residual = a - (ar + k * math.pi)
    else:
        residual = a - (k * math.pi - ar)
    if abs(residual) > AREA_RESIDUAL_TOL:
        raise InconsistentPolygonError(
            f"angle/area identity residual {residual:.3e} exceeds {AREA_RESIDUAL_TOL}"
        )
    return a, ar, residual


# ---------------------------------------------------------------------------
# signed area / winding


def _signed_triangle_area(model, a, b, c):
    if model is Model.EUCLIDEAN:
        return 0.5 * _cross2(
            (b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])
        )
    try:
        _, uab = _initial_tangent_raw(model, a, b)
        _, uac = _initial_tangent_raw(model, a, c)
        _, uba = _initial_tangent_raw(model, b, a)
        _, ubc = _initial_tangent_raw(model, b, c)
        _, uca = _initial_tangent_raw(model, c, a)
        _, ucb = _initial_tangent_raw(model, c, b)
    except Exception:
        return 0.0  # degenerate sliver
    if model is Model.SPHERICAL:
        ang_a = math.acos(_clamp(_dot3(uab, uac), -1.0, 1.0))
        ang_b = math.acos(_clamp(_dot3(uba, ubc), -1.0, 1.0))
        ang_c = math.acos(_clamp(_dot3(uca, ucb), -1.0, 1.0))
        excess = ang_a + ang_b + ang_c - math.pi
        sign = 1.0 if _det3(a, b, c) >= 0 else -1.0
        return sign * excess
    ang_a = math.acos(_clamp(_ldot(uab, uac), -1.0, 1.0))
    ang_b = math.acos(_clamp(_ldot(uba, ubc), -1.0, 1.0))
    ang_c = math.acos(_clamp(_ldot(uca, ucb), -1.0, 1.0))
    defect = math.pi - (ang_a + ang_b + ang_c)
    sign = 1.0 if _det3(a, b, c) >= 0 else -1.0
    return sign * defect


def _loop_signed_area(model, pts):
    """Signed area on the loop's left via fan triangulation from corner 0."""
    if model is Model.EUCLIDEAN:
        acc = 0.0
        n = len(pts)
        for i in range(n):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            acc += x1 * y2 - x2 * y1
        return 0.5 * acc
    acc = 0.0
    for i in range(1, len(pts) - 1):
        acc += _signed_triangle_area(model, pts[0], pts[i], pts[i + 1])
    return acc


def _direction_to(model, z, p):
    try:
        _, u = _initial_tangent_raw(model, z, p)
    except Exception:
        return None
    return u


def _loop_winding(model, pts, z, _depth=0):
    """Winding number of the loop around z, or None when degenerate
    (z on the loop, or a subdivision point antipodal to z)."""
    if model is Model.EUCLIDEAN:
        total = 0.0
        n = len(pts)
        for i in range(n):
            ax, ay = pts[i][0] - z[0], pts[i][1] - z[1]
            bx, by = pts[(i + 1) % n][0] - z[0], pts[(i + 1) % n][1] - z[1]
            na, nb = math.hypot(ax, ay), math.hypot(bx, by)
            if na < 1e-13 or nb < 1e-13:
                return None
            total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        return total / TWO_PI
    # curved models: subdivide sides, accumulate direction increments at z
    total = 0.0
    n = len(pts)
    prev_u = None
    first_u = None
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        try:
            d, v = _initial_tangent_raw(model, a, b)
        except Exception:
            return None
        steps = max(1, int(math.ceil(d / 0.2)))
        for k in range(steps):
            p, _ = _geodesic_raw(model, a, v, d * k / steps)
            u = _direction_to(model, z, p)
            if u is None:
                return None
            if prev_u is not None:
                inc = _oriented_angle_raw(model, z, prev_u, u)
                if inc > math.pi:
                    inc -= TWO_PI
                if abs(inc) > 2.5:
                    return None  # too coarse / nearly antipodal
                total += inc
            else:
                first_u = u
            prev_u = u
    inc = _oriented_angle_raw(model, z, prev_u, first_u)
    if inc > math.pi:
        inc -= TWO_PI
    total += inc
    return total / TWO_PI


# ---------------------------------------------------------------------------
# ray / segment intersections


def _ray_cross_line(model, p, d, line, t_min, t_max):
    """Crossing parameters of the ray (p, d) with a supporting geodesic.

    Returns a list of (t, point) with t in (t_min, t_max]; on the sphere
    all branches in range are produced.
    """
    out = []
    if model is Model.EUCLIDEAN:
        nx, ny, c = line[4], line[5], line[6]
        denom = nx * d[0] + ny * d[1]
        if abs(denom) < 1e-15:
            return out
        t = (c - nx * p[0] - ny * p[1]) / denom
        if t_min < t <= t_max:
            out.append((t, (p[0] + t * d[0], p[1] + t * d[1])))
        return out
    if model is Model.SPHERICAL:
        n = line
        cp, cd = _dot3(p, n), _dot3(d, n)
        if abs(cp) < 1e-15 and abs(cd) < 1e-15:
            return out  # ray lies in the side's great circle
        t0 = math.atan2(-cp, cd)  # sin(t)*cd + cos(t)*cp = 0
        k0 = math.floor((t_min - t0) / math.pi) + 1
        t = t0 + k0 * math.pi
        while t <= t_max:
            if t > t_min:
                q, _ = _geodesic_raw(model, p, d, t)
                out.append((t, q))
            t += math.pi
        return out
    m = line
    cp, cd = _ldot(p, m), _ldot(d, m)
    # cosh(t)*cp + sinh(t)*cd = 0  =>  tanh(t) = -cp/cd
    if abs(cd) < 1e-15 or abs(cp) >= abs(cd):
        return out
    t = math.atanh(-cp / cd)
    # cosh(t) past ~40 loses the hyperboloid constraint to cancellation
    if t_min < t <= t_max and t < 40.0:
        q, _ = _geodesic_raw(model, p, d, t)
        q2 = _ldot(q, q)
        if q2 < 0:
            out.append((t, _lnormalize_timelike(q)))
    return out


def _offset_on_side(model, side_start, side_dir, length, q, tol):
    """Arc offset of q on the side, or None if q is off the segment."""
    if model is Model.EUCLIDEAN:
        s = (q[0] - side_start[0]) * side_dir[0] + (q[1] - side_start[1]) * side_dir[1]
        # reject points off the supporting line (caller usually guarantees)
        if -tol <= s <= length + tol:
            return min(max(s, 0.0), length)
        return None
    if model is Model.SPHERICAL:
        c1 = _dot3(q, side_start)
        c2 = _dot3(q, side_dir)
        s = math.atan2(c2, c1) % TWO_PI
        if s > math.pi:
            s -= TWO_PI
        if -tol <= s <= length + tol:
            return min(max(s, 0.0), length)
        return None
    # q = cosh(s) a + sinh(s) u on the supporting geodesic => sinh(s) = <q,u>_L
    c2 = _ldot(q, side_dir)
    s = math.asinh(c2)
    if -tol <= s <= length + tol:
        return min(max(s, 0.0), length)
    return None


def _segments_intersect(model, a1, a2, side_a: Side, b1, b2, side_b: Side):
    if model is Model.EUCLIDEAN:
        r = (a2[0] - a1[0], a2[1] - a1[1])
        s = (b2[0] - b1[0], b2[1] - b1[1])
        denom = _cross2(r, s)
        qp = (b1[0] - a1[0], b1[1] - a1[1])
        if abs(denom) < 1e-14:
            if abs(_cross2(qp, r)) > 1e-12:
                return False
            # collinear: overlap test along r
            rr = _dot2(r, r)
            t0 = _dot2(qp, r) / rr
            t1 = t0 + _dot2(s, r) / rr
            lo, hi = min(t0, t1), max(t0, t1)
            return hi > 1e-12 and lo < 1 - 1e-12
        t = _cross2(qp, s) / denom
        u = _cross2(qp, r) / denom
        eps = 1e-12
        return eps < t < 1 - eps and eps < u < 1 - eps
    # curved models: intersect the two supporting geodesics, then check arcs
    la, lb = side_a.line, side_b.line
    w = _cross3(la, lb)
    nw = math.sqrt(abs(_dot3(w, w))) if model is Model.SPHERICAL else None
    if model is Model.SPHERICAL:
        if nw < 1e-12:
            return False  # same great circle; distinct simple loops: ignore
        for cand in (_normalize3(w), _normalize3((-w[0], -w[1], -w[2]))):
            sa = _offset_on_side(
                model, a1, side_a.segment.direction.vec, side_a.length, cand, -1e-12
            )
            sb = _offset_on_side(
                model, b1, side_b.segment.direction.vec, side_b.length, cand, -1e-12
            )
            if sa is not None and sb is not None:
                return True
        return False
    # hyperbolic: intersection point of the two planes, if timelike
    w = _cross3((la[0], la[1], -la[2]), (lb[0], lb[1], -lb[2]))
    q2 = _ldot(w, w)
    if q2 >= -1e-14:
        return False  # geodesics diverge
    cand = _lnormalize_timelike(w)
    sa = _offset_on_side(
        model, a1, side_a.segment.direction.vec, side_a.length, cand, -1e-12
    )
    sb = _offset_on_side(
        model, b1, side_b.segment.direction.vec, side_b.length, cand, -1e-12
    )
    return sa is not None and sb is not None


def _point_segment_distance(model, z, a, b, line):
    if model is Model.EUCLIDEAN:
        ax, ay = a
        ux, uy = b[0] - ax, b[1] - ay
        ll = ux * ux + uy * uy
        t = ((z[0] - ax) * ux + (z[1] - ay) * uy) / ll
        t = min(max(t, 0.0), 1.0)
        return math.hypot(z[0] - ax - t * ux, z[1] - ay - t * uy)
    d_end = min(_distance_raw(model, z, a), _distance_raw(model, z, b))
    if model is Model.SPHERICAL:
        n = line
        foot_raw = tuple(z[i] - _dot3(z, n) * n[i] for i in range(3))
        if _dot3(foot_raw, foot_raw) < 1e-18:
            return d_end
        foot = _normalize3(foot_raw)
        d, v = _initial_tangent_raw(model, a, b)
        s = _offset_on_side(model, a, v, d, foot, 0.0)
        if s is not None:
            return _distance_raw(model, z, foot)
        return d_end
    m = line
    foot_raw = tuple(z[i] - _ldot(z, m) * m[i] for i in range(3))
    if _ldot(foot_raw, foot_raw) > -1e-18:
        return d_end
    foot = _lnormalize_timelike(foot_raw)
    d, v = _initial_tangent_raw(model, a, b)
    s = _offset_on_side(model, a, v, d, foot, 0.0)
    if s is not None:
        return _distance_raw(model, z, foot)
    return d_end


def first_hit(polygon: Polygon, p, d, t_min: float = 1e-12) -> HitResult:
    """First boundary feature met by the geodesic ray from p with direction d.

    p may be a Point or raw coords; d a Direction or raw vector.  The ray
    must start in the closed table, pointing inward when on the boundary.
    A hit lands on a corner when the hit point is within 1e-9 of it.
    """
    if isinstance(p, Point):
        p = p.coords
    if isinstance(d, Direction):
        d = d.vec
    model = polygon.model
    t_max = math.inf if model is not Model.SPHERICAL else TWO_PI + t_min + 1e-9
    best = None  # (t, side, s_offset, point)
    for side in polygon.sides:
        a = polygon.corners[side.start_corner].point.coords
        for t, q in _ray_cross_line(model, p, d, side.line, t_min, t_max):
            if best is not None and t >= best[0]:
                continue
            s = _offset_on_side(
                model, a, side.segment.direction.vec, side.length, q, CORNER_HIT_TOL
            )
            if s is None:
                continue
            best = (t, side, s, q)
    if best is None:
        raise IntegrityError("ray escaped the polygon (no boundary hit found)")
    t, side, s, q = best
    start_c = polygon.corners[side.start_corner]
    end_c = polygon.corners[side.end_corner]
    if _distance_raw(model, q, start_c.point.coords) <= CORNER_HIT_TOL:
        return HitResult("corner", start_c.index, t, 0.0, start_c.point.coords)
    if _distance_raw(model, q, end_c.point.coords) <= CORNER_HIT_TOL:
        return HitResult("corner", end_c.index, t, side.length, end_c.point.coords)
    return HitResult("side", side.index, t, s, q)


# ---------------------------------------------------------------------------
# Coxeter relation matrix


def coxeter_matrix(polygon: Polygon):
    """Relation orders n(a, b) for the reflection group of the polygon.

    For sides a, b sharing a corner of angle alpha: if alpha/pi is a
    rational m/n in lowest terms (denominators up to 1e6, residual below
    1e-9), the entry is n; otherwise math.inf.  Non-adjacent pairs get
    math.inf, the diagonal 1.
    """
    n_sides = len(polygon.sides)
    mat = [[math.inf] * n_sides for _ in range(n_sides)]
    for i in range(n_sides):
        mat[i][i] = 1
    for c in polygon.corners:
        ratio = c.angle / math.pi
        frac = Fraction(ratio).limit_denominator(RATIONAL_ANGLE_MAX_DEN)
        if abs(ratio - float(frac)) < 1e-9 and frac.denominator <= RATIONAL_ANGLE_MAX_DEN:
            order = frac.denominator
        else:
            order = math.inf
        a, b = c.side_in, c.side_out
        mat[a][b] = order
        mat[b][a] = order
    return mat
