"""Canonical polygons and seeded random polygon generators."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .geom import Model, Point, _geodesic_raw
from .polygon import Polygon, validate_polygon


def unit_square() -> Polygon:
    return validate_polygon(
        [[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]], Model.EUCLIDEAN
    )


def spherical_octant() -> Polygon:
    """The coordinate octant: a spherical triangle with three right angles."""
    return validate_polygon(
        [[(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]], Model.SPHERICAL
    )


def _hyperbolic_triangle_corners(circumradius: float):
    center = (0.0, 0.0, 1.0)
    corners = []
    for k in range(3):
        phi = 2.0 * math.pi * k / 3.0
        v = (math.cos(phi), math.sin(phi), 0.0)
        p, _ = _geodesic_raw(Model.HYPERBOLIC, center, v, circumradius)
        corners.append(p)
    return corners


def _equilateral_angle(circumradius: float) -> float:
    tri = validate_polygon([_hyperbolic_triangle_corners(circumradius)], Model.HYPERBOLIC)
    return tri.corners[0].angle


def hyperbolic_equilateral(angle: float = math.pi / 4) -> Polygon:
    """Equilateral hyperbolic triangle with the given corner angle.

    Solved numerically for the circumradius; angle must be < pi/3.
    """
    if not 0 < angle < math.pi / 3:
        raise ValueError("equilateral hyperbolic triangles need 0 < angle < pi/3")
    r = brentq(lambda x: _equilateral_angle(x) - angle, 1e-3, 12.0, xtol=1e-14)
    return validate_polygon([_hyperbolic_triangle_corners(r)], Model.HYPERBOLIC)


def square_with_obstacle() -> Polygon:
    """Unit square with a clockwise triangular obstacle (kappa = 7)."""
    return validate_polygon(
        [
            [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            [(0.4, 0.4), (0.45, 0.62), (0.62, 0.45)],
        ],
        Model.EUCLIDEAN,
    )


# ---------------------------------------------------------------------------
# seeded random polygons (test fixtures)


def random_convex_polygon(rng: np.random.Generator, n_min=3, n_max=8) -> Polygon:
    """Random convex euclidean polygon: points on a randomized circle."""
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=n))
        if np.min(np.diff(angles)) < 0.15:
            continue
        radii = rng.uniform(0.5, 1.5, size=n)
        pts = [
            (r * math.cos(a), r * math.sin(a)) for a, r in zip(angles, radii)
        ]
        hull = _convex_hull(pts)
        if len(hull) >= n_min:
            return validate_polygon([hull], Model.EUCLIDEAN)


def _convex_hull(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def half(iterable):
        out = []
        for p in iterable:
            while len(out) >= 2 and (
                (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])
            ) <= 1e-12:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def random_triangle(rng: np.random.Generator, min_angle=0.35) -> Polygon:
    """Random euclidean triangle with all angles at least min_angle."""
    while True:
        pts = [tuple(rng.uniform(-1.0, 1.0, size=2)) for _ in range(3)]
        cross = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (
            pts[1][1] - pts[0][1]
        ) * (pts[2][0] - pts[0][0])
        if cross < 0:
            pts = [pts[0], pts[2], pts[1]]
        if abs(cross) < 0.2:
            continue
        poly = validate_polygon([pts], Model.EUCLIDEAN)
        if min(c.angle for c in poly.corners) >= min_angle:
            return poly


def random_spherical_triangle(rng: np.random.Generator) -> Polygon:
    """Random small spherical triangle around a random center."""
    while True:
        c = _random_unit_vector(rng)
        pts = []
        for k in range(3):
            phi = 2.0 * math.pi * k / 3.0 + rng.uniform(-0.4, 0.4)
            r = rng.uniform(0.3, 0.9)
            e1, e2 = _sphere_frame(c)
            v = tuple(
                math.cos(phi) * a + math.sin(phi) * b for a, b in zip(e1, e2)
            )
            p, _ = _geodesic_raw(Model.SPHERICAL, c, v, r)
            pts.append(p)
        try:
            poly = validate_polygon([pts], Model.SPHERICAL)
        except Exception:
            continue
        if min(cn.angle for cn in poly.corners) >= 0.3:
            return poly


def random_hyperbolic_triangle(rng: np.random.Generator) -> Polygon:
    """Random hyperbolic triangle around the hyperboloid apex."""
    while True:
        pts = []
        for k in range(3):
            phi = 2.0 * math.pi * k / 3.0 + rng.uniform(-0.4, 0.4)
            r = rng.uniform(0.4, 1.4)
            v = (math.cos(phi), math.sin(phi), 0.0)
            p, _ = _geodesic_raw(Model.HYPERBOLIC, (0.0, 0.0, 1.0), v, r)
            pts.append(p)
        try:
            poly = validate_polygon([pts], Model.HYPERBOLIC)
        except Exception:
            continue
        if min(cn.angle for cn in poly.corners) >= 0.25:
            return poly


def _random_unit_vector(rng):
    zz = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    rr = math.sqrt(max(0.0, 1.0 - zz * zz))
    return (rr * math.cos(phi), rr * math.sin(phi), zz)


def _sphere_frame(p):
    ref = (0.0, 0.0, 1.0) if abs(p[2]) < 0.9 else (1.0, 0.0, 0.0)
    s = sum(a * b for a, b in zip(ref, p))
    w = tuple(r - s * pc for r, pc in zip(ref, p))
    n = math.sqrt(sum(x * x for x in w))
    e1 = tuple(x / n for x in w)
    e2 = (
        p[1] * e1[2] - p[2] * e1[1],
        p[2] * e1[0] - p[0] * e1[2],
        p[0] * e1[1] - p[1] * e1[0],
    )
    return e1, e2


def random_interior_point(polygon: Polygon, rng: np.random.Generator, margin=1e-3):
    """A uniformly random point of the table, at least ``margin`` from the
    boundary (rejection sampling per model)."""
    from .stats import sample_table_point

    while True:
        p = sample_table_point(polygon, rng)
        if polygon.distance_to_boundary(p) > margin:
            return p
