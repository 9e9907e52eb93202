"""Closed-form averages, seeded Monte Carlo estimation, quadratic-growth
fits, and almost-everywhere tail-bound verifiers.

Monte Carlo runs use numpy's PCG64 generator with one spawned stream per
sample index, so results are bit-identical for a fixed seed and sample
count regardless of worker count or scheduling.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BilliardError,
    DomainError,
    ExceptionalBasepointError,
    ExceptionalDirectionError,
    InvalidBaseError,
)
from .counting import (
    CountingSeries,
    direction_counting_map,
    position_counting_flow,
    position_counting_map,
    total_curve_length,
    total_optical_length,
)
from .geom import Model, _distance_raw, _geodesic_raw, _lnormalize_timelike
from .polygon import Polygon
from .unfold import DEFAULT_MAX_TILES, outer_boundary_curve

TWO_PI = 2.0 * math.pi
RESAMPLE_CAP = 1000
SUSPICIOUS_EXCEPTIONAL_RATE = 0.01


def zeta(x: float) -> float:
    """1 - cos(x) - (2/pi) x on [0, pi]; the periodic part of the
    spherical average (vanishes at 0, pi/2 and pi)."""
    if x < -1e-12 or x > math.pi + 1e-12:
        raise DomainError("zeta is defined on [0, pi]")
    return 1.0 - math.cos(x) - (2.0 / math.pi) * x


class Kind(enum.Enum):
    DIRECTION_MAP = "direction-map"
    POSITION_FLOW = "position-flow"


@dataclass(frozen=True)
class AverageValue:
    """Closed-form average: the total integral, the per-parameter expected
    value, and (hyperbolic only) the printed cosh-l variant for comparison."""

    total: float
    normalized: float
    printed_total: float


@dataclass(frozen=True)
class ClosedFormAverage:
    """Evaluator of the closed-form average counting function."""

    model: Model
    kind: Kind
    kappa: int
    area: float
    angle_sum: float

    def value(self, arg: float) -> AverageValue:
        k, ar = self.kappa, self.area
        if self.kind is Kind.DIRECTION_MAP:
            if self.model is not Model.EUCLIDEAN:
                raise DomainError("direction averages are euclidean-only")
            total = math.pi * k * arg
            return AverageValue(total, total / TWO_PI, total)
        if self.model is Model.EUCLIDEAN:
            total = math.pi * k * arg * arg / 2.0
            return AverageValue(total, total / ar, total)
        if self.model is Model.SPHERICAL:
            frac = arg - math.pi * math.floor(arg / math.pi)
            total = (k * math.pi + ar) * ((2.0 / math.pi) * arg + zeta(frac))
            return AverageValue(total, total / ar, total)
        coeff = k * math.pi - ar
        total = coeff * (math.cosh(arg) - 1.0)
        printed = coeff * math.cosh(arg)
        return AverageValue(total, total / ar, printed)


def closed_form(polygon: Polygon, kind: Kind) -> ClosedFormAverage:
    return ClosedFormAverage(
        polygon.model, kind, polygon.kappa(), polygon.area, polygon.angle_sum
    )


def closed_form_average(polygon: Polygon, kind: Kind, arg: float) -> AverageValue:
    """The average counting function at ``arg`` (steps n or length l).

    total: the measure-weighted integral over the parameter space;
    normalized: divided by 2*pi (direction) or the table area (position).
    The hyperbolic total uses cosh(l) - 1, matching the exponential-map
    density integral; printed_total carries the cosh(l) variant.
    """
    return closed_form(polygon, kind).value(arg)


# ---------------------------------------------------------------------------
# sampling


def sample_table_point(polygon: Polygon, rng: np.random.Generator):
    """One point, uniform w.r.t. the model's riemannian area on the table."""
    model = polygon.model
    if model is Model.EUCLIDEAN:
        xs = [c.point.coords[0] for c in polygon.corners]
        ys = [c.point.coords[1] for c in polygon.corners]
        lo = (min(xs), min(ys))
        hi = (max(xs), max(ys))
        while True:
            p = (rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]))
            if polygon.point_in_table(p):
                return p
    if model is Model.SPHERICAL:
        while True:
            zz = rng.uniform(-1.0, 1.0)
            phi = rng.uniform(0.0, TWO_PI)
            rr = math.sqrt(max(0.0, 1.0 - zz * zz))
            p = (rr * math.cos(phi), rr * math.sin(phi), zz)
            if polygon.point_in_table(p):
                return p
    center = _lnormalize_timelike(
        tuple(sum(c.point.coords[i] for c in polygon.corners) for i in range(3))
    )
    radius = max(
        _distance_raw(model, center, c.point.coords) for c in polygon.corners
    ) + 0.2
    ch = math.cosh(radius) - 1.0
    from .geom import _frame_raw

    e1, e2 = _frame_raw(model, center)
    while True:
        r = math.acosh(1.0 + rng.uniform(0.0, ch))
        phi = rng.uniform(0.0, TWO_PI)
        v = tuple(
            math.cos(phi) * a + math.sin(phi) * b for a, b in zip(e1, e2)
        )
        p, _ = _geodesic_raw(model, center, v, r)
        if polygon.point_in_table(p):
            return p


@dataclass
class MCEstimate:
    """Seeded Monte Carlo estimate with per-sample values."""

    samples: int
    seed: int
    mean: float
    standard_error: float
    values: np.ndarray
    exceptional_count: int
    suspicious: bool = False
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values, seed, exceptional_count, meta=None):
        values = np.asarray(values, dtype=float)
        n = len(values)
        mean = float(values.mean())
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        attempts = n + exceptional_count
        suspicious = exceptional_count > SUSPICIOUS_EXCEPTIONAL_RATE * attempts
        if suspicious:
            warnings.warn(
                f"exceptional-sample rate {exceptional_count}/{attempts} exceeds "
                f"{SUSPICIOUS_EXCEPTIONAL_RATE:.0%}: possible transversality failure",
                stacklevel=2,
            )
        return cls(
            n, seed, mean, se, values, exceptional_count, suspicious, dict(meta or {})
        )

    def z_score(self, reference: float) -> float:
        if self.standard_error == 0:
            # zero-variance sample: exact agreement or an outright failure
            diff = self.mean - reference
            return 0.0 if abs(diff) < 1e-9 else math.copysign(math.inf, diff)
        return (self.mean - reference) / self.standard_error


_EXCEPTIONAL = (
    ExceptionalBasepointError,
    ExceptionalDirectionError,
    InvalidBaseError,
)


def _run_sample(args):
    """One Monte Carlo sample; exceptional parameters are resampled
    within the sample's own stream and counted."""
    polygon, kind, arg, seed_child, max_tiles = args
    rng = np.random.default_rng(seed_child)
    exceptional = 0
    for _ in range(RESAMPLE_CAP):
        try:
            if kind is Kind.DIRECTION_MAP:
                param = rng.uniform(0.0, TWO_PI)
                series = direction_counting_map(
                    polygon, param, arg, max_tiles=max_tiles
                )
            else:
                param = sample_table_point(polygon, rng)
                series = position_counting_flow(
                    polygon, param, arg, max_tiles=max_tiles
                )
        except _EXCEPTIONAL:
            exceptional += 1
            continue
        return float(len(series)), param, exceptional
    raise BilliardError("resample cap exceeded")


def mc_average(
    polygon: Polygon,
    kind: Kind,
    arg: float,
    samples: int,
    seed: int,
    *,
    workers: int = 1,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> MCEstimate:
    """Monte Carlo estimate of the normalized average counting function.

    DIRECTION_MAP draws directions uniformly on the circle and averages
    gd_theta(n); POSITION_FLOW draws table points uniformly w.r.t. the
    riemannian area and averages gc_z(l).  Exceptional parameters
    (degenerate directions, antipodal corner focusing) are resampled
    inside the sample's own stream and counted.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    seed_children = np.random.SeedSequence(seed).spawn(samples)
    tasks = [(polygon, kind, arg, s, max_tiles) for s in seed_children]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_sample, tasks, chunksize=16))
    else:
        results = [_run_sample(t) for t in tasks]
    values = [r[0] for r in results]
    params = [r[1] for r in results]
    exceptional = sum(r[2] for r in results)
    est = MCEstimate.from_values(
        values,
        seed,
        exceptional,
        meta={"kind": kind.value, "arg": arg, "samples": samples},
    )
    est.meta["parameters"] = params
    return est


@dataclass
class PositionMapComparison:
    """Both sides of the boundary-curve identities for one corner.

    lhs estimates are already scaled by the perimeter, so their means
    estimate the boundary integrals directly.
    """

    corner: int
    n: int
    pure: MCEstimate
    optical: MCEstimate
    rhs_pure: float
    rhs_optical: float
    perimeter: float

    def z_scores(self):
        return (
            self.pure.z_score(self.rhs_pure),
            self.optical.z_score(self.rhs_optical),
        )


def mc_average_position_map(
    polygon: Polygon,
    corner: int,
    n: int,
    samples: int,
    seed: int,
    *,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> PositionMapComparison:
    """Compare the boundary integrals of gd_s(n;v), god_s(n;v) with the
    outer-boundary curve sums (pure lengths and optical lengths from v)."""
    if polygon.model is not Model.EUCLIDEAN:
        raise DomainError("boundary-map averages are euclidean-only")
    if n < 0:
        raise ValueError("n must be nonnegative")
    perim = polygon.perimeter
    rhs_pure = 0.0
    rhs_optical = 0.0
    vpoint = polygon.corners[corner].point.coords
    for k in range(1, n + 1):
        pieces = outer_boundary_curve(polygon, corner, k)
        if pieces:
            rhs_pure += total_curve_length(pieces)
            rhs_optical += total_optical_length(pieces, vpoint)
    seed_children = np.random.SeedSequence(seed).spawn(samples)
    pure_vals, optical_vals = [], []
    exceptional = 0
    corner_margin = 1e-7
    for child in seed_children:
        rng = np.random.default_rng(child)
        for _ in range(RESAMPLE_CAP):
            s_arc = rng.uniform(0.0, perim)
            bp = polygon.boundary_point(s_arc)
            side_len = polygon.sides[bp.side].length
            if bp.s < corner_margin or side_len - bp.s < corner_margin:
                exceptional += 1
                continue
            try:
                pure, optical = position_counting_map(
                    polygon, bp, n, max_tiles=max_tiles
                )
            except _EXCEPTIONAL:
                exceptional += 1
                continue
            pure_vals.append(pure.per_corner(corner).value(n) * perim)
            opt_c = optical.per_corner(corner)
            optical_vals.append(float(opt_c.value(n)) * perim)
            break
        else:
            raise BilliardError("resample cap exceeded for boundary sampling")
    meta = {"corner": corner, "n": n, "scaled_by": perim}
    return PositionMapComparison(
        corner,
        n,
        MCEstimate.from_values(pure_vals, seed, exceptional, meta=meta),
        MCEstimate.from_values(optical_vals, seed, exceptional, meta=meta),
        rhs_pure,
        rhs_optical,
        perim,
    )


# ---------------------------------------------------------------------------
# growth fits and tail checks


@dataclass(frozen=True)
class QuadraticFit:
    c1: float
    c2: float

    @property
    def ratio(self) -> float:
        return self.c2 / self.c1 if self.c1 > 0 else math.inf


def quadratic_bound_fit(values) -> QuadraticFit:
    """Envelope constants of S(n)/n^2 over the given abscissae (n >= 5).

    A bounded ratio c2/c1 over a growing range is the empirical signature
    of quadratic growth."""
    pts = [(int(n), float(s)) for n, s in values if n >= 5]
    if len(pts) < 10:
        raise ValueError("need at least 10 abscissae with n >= 5")
    ratios = [s / (n * n) for n, s in pts]
    return QuadraticFit(min(ratios), max(ratios))


@dataclass(frozen=True)
class TailCheckResult:
    violation_fraction: float
    n_samples: int
    n_violations: int
    lem1_fraction: Optional[float] = None


def ae_tail_check(
    ts,
    sample_curves,
    avg_curve,
    eps: float,
    T: float,
    C: Optional[float] = None,
) -> TailCheckResult:
    """Fraction of samples violating f(x;t) <= F(t)(1+log(1+F(t)))^(1+eps)
    at any abscissa beyond T.

    ``sample_curves`` is (n_samples, n_ts); every row and the average
    curve must be nondecreasing.  When C is given, also reports the
    fraction of samples admitting some t >= T with f(x,t) < C * F(t).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    ts = np.asarray(ts, dtype=float)
    f = np.atleast_2d(np.asarray(sample_curves, dtype=float))
    F = np.asarray(avg_curve, dtype=float)
    if f.shape[1] != ts.shape[0] or F.shape[0] != ts.shape[0]:
        raise ValueError("curve shapes do not match the abscissae")
    if np.any(np.diff(f, axis=1) < -1e-9):
        raise ValueError("sample curves must be nondecreasing")
    if np.any(np.diff(F) < -1e-9):
        raise ValueError("average curve must be nondecreasing")
    mask = ts > T
    if not mask.any():
        raise ValueError("no abscissae beyond T")
    bound = F[mask] * np.power(1.0 + np.log1p(F[mask]), 1.0 + eps)
    viol = np.any(f[:, mask] > bound + 1e-12, axis=1)
    lem1 = None
    if C is not None:
        lem1 = float(np.mean(np.any(f[:, mask] < C * F[mask], axis=1)))
    return TailCheckResult(
        float(viol.mean()), f.shape[0], int(viol.sum()), lem1
    )
