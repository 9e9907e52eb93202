"""Polygonal billiards on constant-curvature surfaces.

Counting functions for singular orbits, partial complexities via exact
beam unfolding, and seeded Monte Carlo verification of the closed-form
average formulas.
"""

__version__ = "0.1.0"

from .geom import Model, Point, Direction, GeodesicSegment, Isometry  # noqa: F401
from .polygon import Polygon, validate_polygon, kappa  # noqa: F401
