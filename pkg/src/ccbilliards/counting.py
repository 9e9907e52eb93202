"""Counting functions for singular billiard orbits.

Position counting for the flow (all three geometries), direction
counting for the map (euclidean), position counting for the map with
pure and optical (sin-alpha) weights, plus weighted counting and the
optical/curve lengths used by the boundary-curve identities.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from typing import Callable, Optional, Sequence

from .errors import DegenerateViewError, InvalidBaseError
from .geom import Model, Point
from .polygon import BoundaryPoint, Polygon
from .unfold import (
    DEFAULT_MAX_TILES,
    SingularOrbitRecord,
    SplitResult,
    boundary_split_beams,
    parallel_split_beams,
    split_beams,
)


class CountingSeries:
    """A right-continuous nondecreasing step function of orbit counts.

    Events sit at the recorded lengths (flow) or bounce counts (map),
    tagged per corner; evaluation at x counts events with abscissa <= x.
    A weighted series sums its per-record weights instead.
    """

    def __init__(
        self,
        records: Sequence[SingularOrbitRecord],
        kind: str,
        *,
        weights: Optional[Sequence[float]] = None,
        complete: bool = True,
        meta: Optional[dict] = None,
    ):
        if kind not in ("length", "steps"):
            raise ValueError("kind must be 'length' or 'steps'")
        order = sorted(
            range(len(records)),
            key=lambda i: (
                _abscissa(records[i], kind),
                records[i].corner,
                records[i].word,
            ),
        )
        self.records = [records[i] for i in order]
        self.kind = kind
        self.weights = (
            None if weights is None else [float(weights[i]) for i in order]
        )
        self.complete = complete
        self.meta = dict(meta or {})
        self._xs = [_abscissa(r, kind) for r in self.records]
        if self.weights is None:
            self._cum = list(range(1, len(self.records) + 1))
        else:
            acc, cum = 0.0, []
            for w in self.weights:
                acc += w
                cum.append(acc)
            self._cum = cum

    def __len__(self):
        return len(self.records)

    def abscissae(self):
        return list(self._xs)

    def value(self, x: float):
        """Count (or weight sum) of events with abscissa <= x."""
        i = bisect.bisect_right(self._xs, x)
        return self._cum[i - 1] if i else (0.0 if self.weights else 0)

    __call__ = value

    def per_corner(self, corner: int) -> "CountingSeries":
        idx = [i for i, r in enumerate(self.records) if r.corner == corner]
        return CountingSeries(
            [self.records[i] for i in idx],
            self.kind,
            weights=None if self.weights is None else [self.weights[i] for i in idx],
            complete=self.complete,
            meta=self.meta,
        )

    def corners(self):
        return sorted({r.corner for r in self.records})

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "complete": self.complete,
            "meta": self.meta,
            "weights": self.weights,
            "events": [
                {
                    "abscissa": _abscissa(r, self.kind),
                    "corner": r.corner,
                    "length": r.length,
                    "steps": r.steps,
                    "word": list(r.word),
                    "theta": r.theta,
                    "u": r.u,
                    "source_s": r.source_s,
                    "source_alpha": r.source_alpha,
                }
                for r in self.records
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CountingSeries":
        records = [
            SingularOrbitRecord(
                corner=e["corner"],
                length=e["length"],
                steps=e["steps"],
                word=tuple(e["word"]),
                theta=e.get("theta"),
                u=e.get("u"),
                source_s=e.get("source_s"),
                source_alpha=e.get("source_alpha"),
            )
            for e in payload["events"]
        ]
        return cls(
            records,
            payload["kind"],
            weights=payload.get("weights"),
            complete=payload.get("complete", True),
            meta=payload.get("meta"),
        )

    @classmethod
    def from_json(cls, text: str) -> "CountingSeries":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["abscissa", "corner", "cumulative_count"])
        for x, r, c in zip(self._xs, self.records, self._cum):
            writer.writerow([repr(x), r.corner, repr(c)])
        return buf.getvalue()

    def __eq__(self, other):
        return (
            isinstance(other, CountingSeries)
            and self.kind == other.kind
            and self.records == other.records
            and self.weights == other.weights
        )


def _abscissa(record: SingularOrbitRecord, kind: str):
    return record.length if kind == "length" else record.steps


# ---------------------------------------------------------------------------
# counting operations


def position_counting_flow(
    polygon: Polygon,
    z,
    max_length: float,
    *,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> CountingSeries:
    """gc_z(l): singular flow orbits from an interior point, by length."""
    if max_length <= 0:
        raise ValueError("max_length must be positive")
    result = split_beams(polygon, z, max_length=max_length, max_tiles=max_tiles)
    zc = z.coords if isinstance(z, Point) else tuple(z)
    series = CountingSeries(
        result.records,
        "length",
        complete=result.complete,
        meta={"base": list(zc), "budget": max_length, "kind": "position-flow"},
    )
    series.split_result = result
    return series


def direction_counting_map(
    polygon: Polygon,
    theta: float,
    max_steps: int,
    *,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> CountingSeries:
    """gd_theta(n): singular map orbits in a fixed direction, by bounce count."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    result = parallel_split_beams(polygon, theta, max_steps, max_tiles=max_tiles)
    series = CountingSeries(
        result.records,
        "steps",
        complete=result.complete,
        meta={"theta": theta, "budget": max_steps, "kind": "direction-map"},
    )
    series.split_result = result
    return series


def position_counting_map(
    polygon: Polygon,
    s,
    max_steps: int,
    *,
    max_tiles: int = DEFAULT_MAX_TILES,
):
    """(gd_s, god_s): pure and optical counting from a boundary point.

    ``s`` is a BoundaryPoint or a global arclength coordinate.  The
    optical series carries weight sin(alpha) per record, alpha being the
    outgoing angle of the source phase point.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    if not isinstance(s, BoundaryPoint):
        s = polygon.boundary_point(float(s))
    if max_steps == 0:
        empty_pure = CountingSeries([], "steps", meta={"kind": "position-map"})
        empty_opt = CountingSeries([], "steps", weights=[], meta={"kind": "position-map-optical"})
        return empty_pure, empty_opt
    result = boundary_split_beams(polygon, s, max_steps=max_steps, max_tiles=max_tiles)
    meta = {"base_s": s.arclength, "budget": max_steps}
    pure = CountingSeries(
        result.records,
        "steps",
        complete=result.complete,
        meta=dict(meta, kind="position-map"),
    )
    optical = CountingSeries(
        result.records,
        "steps",
        weights=[math.sin(r.source_alpha) for r in result.records],
        complete=result.complete,
        meta=dict(meta, kind="position-map-optical"),
    )
    pure.split_result = result
    return pure, optical


def weighted_count(
    series: CountingSeries, w: Callable[[float, SingularOrbitRecord], float]
) -> float:
    """Sum of w(abscissa, record) over every recorded singular orbit.

    With w the indicator of [0, l] this reduces to evaluating the pure
    series at l.
    """
    total = 0.0
    for x, r in zip(series._xs, series.records):
        val = w(x, r)
        if val < 0:
            raise ValueError("weights must be nonnegative")
        total += val
    return total


# ---------------------------------------------------------------------------
# curve and optical lengths (euclidean)


def _as_xy(p):
    if isinstance(p, Point):
        if p.model is not Model.EUCLIDEAN:
            raise DegenerateViewError("optical lengths are euclidean-only")
        return p.coords
    return (float(p[0]), float(p[1]))


def curve_length(polyline) -> float:
    """Total length of a planar polyline."""
    pts = [_as_xy(p) for p in polyline]
    if len(pts) < 2:
        raise ValueError("polyline needs at least 2 points")
    return sum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])
    )


def optical_length(polyline, z) -> float:
    """Optical length of a planar polyline seen from z.

    Integral of the arclength component perpendicular to the line of
    sight: per straight segment, with d the distance from z to the
    supporting line and s the signed offset from the perpendicular foot,
    the closed form is d * [asinh(s/d)] between the endpoints.  Radial
    segments contribute zero; never exceeds the true length.
    """
    pts = [_as_xy(p) for p in polyline]
    zc = _as_xy(z)
    if len(pts) < 2:
        raise ValueError("polyline needs at least 2 points")
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        ux, uy = b[0] - a[0], b[1] - a[1]
        ll = math.hypot(ux, uy)
        if ll < 1e-15:
            continue
        ux, uy = ux / ll, uy / ll
        # signed distance of z from the supporting line
        dperp = (zc[0] - a[0]) * (-uy) + (zc[1] - a[1]) * ux
        d = abs(dperp)
        sa = (a[0] - zc[0]) * ux + (a[1] - zc[1]) * uy
        sb = (b[0] - zc[0]) * ux + (b[1] - zc[1]) * uy
        if d < 1e-12:
            if min(sa, sb) <= 1e-12 and max(sa, sb) >= -1e-12:
                raise DegenerateViewError("viewpoint lies on the polyline")
            continue  # radial segment: no angular sweep
        total += d * abs(math.asinh(sb / d) - math.asinh(sa / d))
    return total


def total_curve_length(polylines) -> float:
    """Sum of curve_length over a list of polylines."""
    return sum(curve_length(p) for p in polylines)


def total_optical_length(polylines, z) -> float:
    """Sum of optical_length over a list of polylines."""
    return sum(optical_length(p, z) for p in polylines)
