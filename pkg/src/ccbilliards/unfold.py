"""Orbit tracing and the exact beam-splitting engine.

A beam is an interval of billiard rays out of a common base point that
share their combinatorial side word.  Instead of reflecting rays we
accumulate the tile isometry g (the product of side reflections) and
pull the base point back through g^{-1}; every traversal then happens in
home-table coordinates with a *virtual source*, distances along rays are
the true orbit lengths, and corner events are exact constructions
(direction and arc length of the geodesic from the virtual source to a
corner).  Splitting at the event directions keeps sub-beams exactly
word-pure: singular directions are assigned to neither sub-beam.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from . import geom
from .errors import (
    BudgetExceededError,
    ExceptionalBasepointError,
    IntegrityError,
    InvalidBaseError,
    UnfoldingIntegrityError,
)
from .geom import (
    Model,
    Point,
    Direction,
    _ID3,
    _apply_point_raw,
    _apply_vec_raw,
    _cross2,
    _distance_raw,
    _dot2,
    _dot3,
    _frame_raw,
    _geodesic_raw,
    _initial_tangent_raw,
    _ldot,
    _lnormalize_timelike,
    _mat3_mul,
    _mat_inverse_raw,
    _normalize3,
)
from .polygon import (
    BoundaryPoint,
    HitResult,
    Polygon,
    _offset_on_side,
    _point_segment_distance,
    _ray_cross_line,
    first_hit,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ANGULAR_EPS = 1e-12  # grazing guard at beam-interval endpoints
DEFAULT_MAX_TILES = 10**7

RUNNING = "RUNNING"
ENDED_AT_CORNER = "ENDED_AT_CORNER"
LENGTH_EXHAUSTED = "LENGTH_EXHAUSTED"
STEP_EXHAUSTED = "STEP_EXHAUSTED"


@dataclass(frozen=True)
class SingularOrbitRecord:
    """One singular orbit: its corner, geodesic length, bounce count,
    side word and source datum at the base."""

    corner: int
    length: float
    steps: int
    word: tuple
    theta: Optional[float] = None  # direction parameter at the base
    u: Optional[float] = None  # transverse coordinate (parallel beams)
    source_s: Optional[float] = None  # boundary arclength of the source
    source_alpha: Optional[float] = None  # outgoing angle at the source

    def sort_key(self):
        return (self.length, self.corner, self.word)


@dataclass(frozen=True)
class CornerImage:
    """Unfolded image of a corner, tagged by the tile word that produced it."""

    corner: int
    point: tuple
    t: float
    word: tuple


@dataclass
class OrbitSegment:
    start: tuple  # raw coords
    direction: tuple  # raw unit tangent
    length: float


@dataclass
class Orbit:
    """A traced billiard orbit."""

    polygon: Polygon
    start: tuple
    initial_direction: tuple
    segments: list  # list[OrbitSegment]
    hits: list  # list[(HitResult, outgoing direction | None)]
    word: tuple
    length: float
    status: str = RUNNING

    @property
    def num_bounces(self) -> int:
        return len(self.word)


def trace_ray(
    polygon: Polygon,
    source,
    direction,
    max_length: float = math.inf,
    max_steps: Optional[int] = None,
) -> Orbit:
    """Trace a billiard orbit until a corner, length or step budget.

    ``source`` may be a Point or raw coords; ``direction`` a Direction or
    raw unit vector (inward when the source is on the boundary).
    """
    p = source.coords if isinstance(source, Point) else tuple(source)
    d = direction.vec if isinstance(direction, Direction) else tuple(direction)
    if max_steps is None:
        max_steps = math.inf
    model = polygon.model
    segments: list[OrbitSegment] = []
    hits = []
    word: list[int] = []
    total = 0.0
    status = RUNNING
    start = p
    d0 = d
    while True:
        hit = first_hit(polygon, p, d)
        if total + hit.t > max_length + 1e-12:
            segments.append(OrbitSegment(p, d, max_length - total))
            total = max_length
            status = LENGTH_EXHAUSTED
            break
        segments.append(OrbitSegment(p, d, hit.t))
        total += hit.t
        if hit.kind == "corner":
            hits.append((hit, None))
            status = ENDED_AT_CORNER
            break
        side = polygon.sides[hit.index]
        q, v_in = _geodesic_raw(model, p, d, hit.t)
        v_out = _apply_vec_raw(model, side.reflection.matrix, v_in)
        q = hit.point
        if model is not Model.EUCLIDEAN:
            q = geom._renorm_point_raw(model, q)
            v_out = geom._renorm_dir_raw(model, q, v_out)
        else:
            n = math.hypot(*v_out)
            v_out = (v_out[0] / n, v_out[1] / n)
        hits.append((hit, v_out))
        word.append(hit.index)
        p, d = q, v_out
        if len(word) >= max_steps:
            status = STEP_EXHAUSTED
            break
    return Orbit(polygon, start, d0, segments, hits, tuple(word), total, status)


@dataclass
class UnfoldedPath:
    points: list  # raw coords of the unfolded breakpoints, start included
    residual: float  # max deviation from the single geodesic
    length: float


def unfold_orbit(orbit: Orbit, *, check: bool = True) -> UnfoldedPath:
    """Straighten an orbit by accumulating side reflections.

    The unfolded breakpoints must lie on the single geodesic of the
    ambient surface leaving the source in the initial direction; the
    maximal deviation is returned and must stay below 1e-8.
    """
    if not orbit.segments:
        raise ValueError("orbit has no segments to unfold")
    model = orbit.polygon.model
    mat = _ID3
    pts = [orbit.start]
    residual = 0.0
    acc = 0.0
    for i, seg in enumerate(orbit.segments):
        end_home, _ = _geodesic_raw(model, seg.start, seg.direction, seg.length)
        unfolded = _apply_point_raw(model, mat, end_home)
        if model is not Model.EUCLIDEAN:
            unfolded = geom._renorm_point_raw(model, unfolded)
        acc += seg.length
        expected, _ = _geodesic_raw(model, orbit.start, orbit.initial_direction, acc)
        dev = _distance_raw(model, unfolded, expected)
        residual = max(residual, dev)
        pts.append(unfolded)
        if i < len(orbit.hits) and orbit.hits[i][1] is not None:
            side = orbit.polygon.sides[orbit.hits[i][0].index]
            mat = _mat3_mul(mat, side.reflection.matrix)
    if check and residual >= 1e-8:
        raise UnfoldingIntegrityError(
            f"unfolded path deviates from a geodesic by {residual:.3e}"
        )
    return UnfoldedPath(pts, residual, acc)


# ---------------------------------------------------------------------------
# angular beam engine


class Beam:
    """An interval of rays out of the base sharing a side word.

    ``inv`` maps unfolded coordinates back to the home table; the virtual
    source is inv(base).  ``lo``/``width`` delimit the direction interval
    (parameters in the base frame, half-open, singular directions belong
    to neither sub-beam).  ``t_lo``/``t_hi`` are the exact arc parameters
    at which the two edge rays entered the current tile, ``entry_min`` a
    safe lower bound over the whole interval.
    """

    __slots__ = (
        "word",
        "mat",
        "inv",
        "lo",
        "width",
        "entry_side",
        "t_lo",
        "t_hi",
        "p_lo",
        "p_hi",
        "entry_min",
    )

    def __init__(self, word, mat, inv, lo, width, entry_side, t_lo, t_hi, p_lo, p_hi, entry_min):
        self.word = word
        self.mat = mat
        self.inv = inv
        self.lo = lo
        self.width = width
        self.entry_side = entry_side
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.p_lo = p_lo
        self.p_hi = p_hi
        self.entry_min = entry_min

    def __repr__(self):
        return (
            f"Beam(word={self.word}, lo={self.lo:.6f}, width={self.width:.6f}, "
            f"entry_min={self.entry_min:.6f})"
        )


class SplitResult(dict):
    """records / live / dead (+ windows when collecting boundary curves)."""

    def __init__(self, records, live, dead, windows=None, complete=True):
        super().__init__(
            records=records, live=live, dead=dead, windows=windows, complete=complete
        )
        self.records = records
        self.live = live
        self.dead = dead
        self.windows = windows
        self.complete = complete


def _coalesce_leaves(leaves):
    """Merge adjacent live leaves that share a word (and hence a tile)."""
    if len(leaves) < 2:
        return leaves
    leaves = sorted(leaves, key=lambda b: b.lo)
    merged = [leaves[0]]
    for b in leaves[1:]:
        prev = merged[-1]
        if b.word == prev.word and abs((prev.lo + prev.width) % TWO_PI - b.lo) < 1e-11:
            merged[-1] = Beam(
                prev.word,
                prev.mat,
                prev.inv,
                prev.lo,
                prev.width + b.width,
                prev.entry_side,
                prev.t_lo,
                b.t_hi,
                prev.p_lo,
                b.p_hi,
                min(prev.entry_min, b.entry_min),
            )
        else:
            merged.append(b)
    # wrap-around merge
    if len(merged) > 1:
        first, last = merged[0], merged[-1]
        if (
            first.word == last.word
            and abs((last.lo + last.width) % TWO_PI - first.lo) < 1e-11
        ):
            merged[0] = Beam(
                first.word,
                first.mat,
                first.inv,
                last.lo,
                last.width + first.width,
                first.entry_side,
                last.t_lo,
                first.t_hi,
                last.p_lo,
                first.p_hi,
                min(first.entry_min, last.entry_min),
            )
            merged.pop()
    return merged


def _param_angle(model, f1, f2, u):
    if model is Model.EUCLIDEAN:
        return math.atan2(_dot2(u, f2), _dot2(u, f1)) % TWO_PI
    if model is Model.SPHERICAL:
        return math.atan2(_dot3(u, f2), _dot3(u, f1)) % TWO_PI
    return math.atan2(_ldot(u, f2), _ldot(u, f1)) % TWO_PI


def _dir_from_param(model, f1, f2, theta):
    c, s = math.cos(theta), math.sin(theta)
    return tuple(c * a + s * b for a, b in zip(f1, f2))


class _AngularEngine:
    def __init__(
        self,
        polygon: Polygon,
        base,
        frame,
        *,
        max_length=math.inf,
        max_steps=None,
        max_tiles=DEFAULT_MAX_TILES,
        interior_base=True,
        collect_depth=None,
    ):
        self.P = polygon
        self.model = polygon.model
        self.base = base
        self.e1, self.e2 = frame
        self.L = max_length
        self.N = math.inf if max_steps is None else max_steps
        self.max_tiles = max_tiles
        self.interior_base = interior_base
        self.collect_depth = collect_depth
        self.records: list[SingularOrbitRecord] = []
        self.live: list[Beam] = []
        self.dead: list[Beam] = []
        self.windows = [] if collect_depth is not None else None
        self.frontier_measure = 0.0  # live queue measure, for the invariant

    # -- per-beam geometry helpers -----------------------------------------

    def _pullback(self, beam: Beam):
        y = _apply_point_raw(self.model, beam.inv, self.base)
        f1 = _apply_vec_raw(self.model, beam.inv, self.e1)
        f2 = _apply_vec_raw(self.model, beam.inv, self.e2)
        if self.model is not Model.EUCLIDEAN:
            y = geom._renorm_point_raw(self.model, y)
        return y, f1, f2

    def _candidates(self, beam, y, f1, f2):
        """(offset, theta, t, corner) for corners possibly hit in this tile."""
        model = self.model
        out = []
        if model is Model.SPHERICAL:
            t_cap = max(beam.t_lo, beam.t_hi) + 3.0 * math.pi + 1.0
            if self.L < math.inf:
                t_cap = min(t_cap, self.L + TWO_PI + 1.0)
        for c in self.P.corners:
            v = c.point.coords
            if model is Model.EUCLIDEAN:
                dx, dy = v[0] - y[0], v[1] - y[1]
                t = math.hypot(dx, dy)
                if t < 1e-9:
                    self._degenerate_base(c, beam)
                    continue
                theta = math.atan2(
                    dx * f2[0] + dy * f2[1], dx * f1[0] + dy * f1[1]
                ) % TWO_PI
                cands = ((theta, t),)
            elif model is Model.HYPERBOLIC:
                t = _distance_raw(model, y, v)
                if t < 1e-9:
                    self._degenerate_base(c, beam)
                    continue
                ch = math.cosh(t)
                w = (v[0] - ch * y[0], v[1] - ch * y[1], v[2] - ch * y[2])
                theta = math.atan2(_ldot(w, f2), _ldot(w, f1)) % TWO_PI
                cands = ((theta, t),)
            else:
                t0 = _distance_raw(model, y, v)
                if t0 < 1e-9 or math.pi - t0 < 1e-9:
                    raise ExceptionalBasepointError(
                        f"corner {c.index} image is antipodal/coincident with the base "
                        f"(word {beam.word})",
                        corner=c.index,
                        word=beam.word,
                    )
                co = math.cos(t0)
                w = (v[0] - co * y[0], v[1] - co * y[1], v[2] - co * y[2])
                theta = math.atan2(_dot3(w, f2), _dot3(w, f1)) % TWO_PI
                theta_op = (theta + math.pi) % TWO_PI
                cands = []
                t = t0
                while t <= t_cap:
                    cands.append((theta, t))
                    t += TWO_PI
                t = TWO_PI - t0
                while t <= t_cap:
                    cands.append((theta_op, t))
                    t += TWO_PI
            full_circle = beam.width >= TWO_PI - 1e-9
            for theta, t in cands:
                off = (theta - beam.lo) % TWO_PI
                if full_circle or ANGULAR_EPS < off < beam.width - ANGULAR_EPS:
                    out.append((off, theta, t, c.index))
        return out

    def _degenerate_base(self, corner, beam):
        if self.interior_base:
            raise ExceptionalBasepointError(
                f"corner {corner.index} image coincides with the base "
                f"(word {beam.word})",
                corner=corner.index,
                word=beam.word,
            )
        # boundary/corner bases legitimately sit on a corner: just skip

    def _reproject(self, side, s):
        """Point of the side at arc offset s, in the side's own
        parameterization (keeps window points exactly on the side's
        geodesic so first_hit cannot see a spurious re-crossing)."""
        a = self.P.corners[side.start_corner].point.coords
        q, _ = _geodesic_raw(self.model, a, side.segment.direction.vec, s)
        return q

    def _entry_before(self, y, d, side, t_below):
        """Largest on-segment crossing of the ray with the window, below t_below."""
        a = self.P.corners[side.start_corner].point.coords
        best = None
        for t, q in _ray_cross_line(self.model, y, d, side.line, 1e-12, t_below - 1e-12):
            s = _offset_on_side(
                self.model, a, side.segment.direction.vec, side.length, q, 1e-7
            )
            if s is None:
                continue
            if best is None or t > best[0]:
                best = (t, s)
        if best is None:
            return None
        return best[0], self._reproject(side, best[1])

    def _exit_after(self, y, d, side, t_above):
        """Smallest on-segment crossing of the ray with ``side`` above t_above."""
        t_max = math.inf if self.model is not Model.SPHERICAL else t_above + TWO_PI + 1.0
        a = self.P.corners[side.start_corner].point.coords
        best = None
        for t, q in _ray_cross_line(
            self.model, y, d, side.line, t_above - 1e-9, t_max
        ):
            s = _offset_on_side(
                self.model, a, side.segment.direction.vec, side.length, q, 1e-7
            )
            if s is None:
                continue
            if best is None or t < best[0]:
                best = (t, q)
        return best

    def _window_crossing_near(self, y, d, side, hint):
        a = self.P.corners[side.start_corner].point.coords
        t_max = math.inf if self.model is not Model.SPHERICAL else hint + TWO_PI + 1.0
        best = None
        for t, q in _ray_cross_line(self.model, y, d, side.line, 1e-12, t_max):
            s = _offset_on_side(
                self.model, a, side.segment.direction.vec, side.length, q, 1e-7
            )
            if s is None:
                continue
            if best is None or abs(t - hint) < abs(best[0] - hint):
                best = (t, s)
        if best is None:
            return None
        return best[0], self._reproject(side, best[1])

    def _confirm_event(self, beam, y, f1, f2, theta, t_cand, corner_idx):
        """The ray at theta must really end at the corner inside this tile."""
        d = _dir_from_param(self.model, f1, f2, theta)
        if beam.entry_side is None:
            p_in, d_in, t_in = self.base, _dir_from_param(self.model, self.e1, self.e2, theta), 0.0
        else:
            side = self.P.sides[beam.entry_side]
            found = self._entry_before(y, d, side, t_cand)
            if found is None:
                return None
            t_in, p_in = found
            _, d_in = _geodesic_raw(self.model, y, d, t_in)
            if self.model is not Model.EUCLIDEAN:
                d_in = geom._renorm_dir_raw(self.model, p_in, d_in)
        try:
            hit = first_hit(self.P, p_in, d_in)
        except IntegrityError:
            return None
        if hit.kind != "corner" or hit.index != corner_idx:
            return None
        if abs((t_in + hit.t) - t_cand) > 1e-7 * (1.0 + t_cand):
            return None
        return t_in

    def _sample_exit(self, beam, y, f1, f2, off_a, off_b):
        """Exit side for the open sub-interval (off_a, off_b)."""
        for frac in (0.5, 0.37, 0.63, 0.21, 0.79):
            off = off_a + (off_b - off_a) * frac
            theta = (beam.lo + off) % TWO_PI
            d = _dir_from_param(self.model, f1, f2, theta)
            if beam.entry_side is None:
                p_in = self.base
                d_in = _dir_from_param(self.model, self.e1, self.e2, theta)
                t_in = 0.0
            else:
                side = self.P.sides[beam.entry_side]
                hint = beam.t_lo + (beam.t_hi - beam.t_lo) * (off / beam.width)
                found = self._window_crossing_near(y, d, side, hint)
                if found is None:
                    continue
                t_in, p_in = found
                _, d_in = _geodesic_raw(self.model, y, d, t_in)
                if self.model is not Model.EUCLIDEAN:
                    d_in = geom._renorm_dir_raw(self.model, p_in, d_in)
            try:
                hit = first_hit(self.P, p_in, d_in)
            except IntegrityError:
                continue
            if hit.kind == "side":
                return hit.index
        return None

    def _foot_candidate(self, beam, y, f1, f2, side, off_a, off_b):
        """Distance from the virtual source to the perpendicular foot on the
        exit side, when the foot lies on the side segment and its direction
        falls inside the sub-interval (the only interior critical point of
        the entry parameter)."""
        model = self.model
        line = side.line
        if model is Model.EUCLIDEAN:
            nx, ny, c = line[4], line[5], line[6]
            g = c - (nx * y[0] + ny * y[1])
            d = abs(g)
            f = (y[0] + g * nx, y[1] + g * ny)
            if d < 1e-13:
                return 0.0  # virtual source on the geodesic: conservative
            u = ((f[0] - y[0]) / d, (f[1] - y[1]) / d)
        elif model is Model.SPHERICAL:
            n = line
            s = _dot3(y, n)
            d = abs(math.asin(max(-1.0, min(1.0, s))))
            w = (y[0] - s * n[0], y[1] - s * n[1], y[2] - s * n[2])
            if _dot3(w, w) < 1e-18 or d < 1e-13:
                return 0.0
            f = _normalize3(w)
            try:
                _, u = _initial_tangent_raw(model, y, f)
            except Exception:
                return 0.0
        else:
            m = line
            s = _ldot(y, m)
            d = math.asinh(abs(s))
            w = (y[0] - s * m[0], y[1] - s * m[1], y[2] - s * m[2])
            if d < 1e-13:
                return 0.0
            try:
                f = _lnormalize_timelike(w)
                _, u = _initial_tangent_raw(model, y, f)
            except Exception:
                return 0.0
        a = self.P.corners[side.start_corner].point.coords
        if (
            _offset_on_side(
                model, a, side.segment.direction.vec, side.length, f, 1e-9
            )
            is None
        ):
            return None  # foot off the segment: entry is monotone, edges win
        theta_f = _param_angle(model, f1, f2, u)
        off = (theta_f - beam.lo) % TWO_PI
        if off_a < off < off_b:
            return d
        return None

    # -- main loop ----------------------------------------------------------

    def run(self, initial_beams) -> SplitResult:
        queue = deque(initial_beams)
        processed = 0
        try:
            while queue:
                beam = queue.popleft()
                processed += 1
                if processed > self.max_tiles:
                    raise BudgetExceededError(
                        f"beam cap {self.max_tiles} exceeded",
                        partial=self._partial(),
                    )
                self._process(beam, queue)
        except BudgetExceededError:
            raise
        self.records.sort(key=lambda r: r.sort_key())
        self.live = _coalesce_leaves(self.live)
        return SplitResult(self.records, self.live, self.dead, self.windows)

    def _partial(self):
        self.records.sort(key=lambda r: r.sort_key())
        return SplitResult(
            self.records, self.live, self.dead, self.windows, complete=False
        )

    def _process(self, beam: Beam, queue):
        y, f1, f2 = self._pullback(beam)
        events = []
        for off, theta, t, ci in self._candidates(beam, y, f1, f2):
            t_in = self._confirm_event(beam, y, f1, f2, theta, t, ci)
            if t_in is None:
                continue
            events.append((off, theta, t, ci))
            if t <= self.L + 1e-12 and len(beam.word) + 1 <= self.N:
                self.records.append(
                    SingularOrbitRecord(
                        corner=ci,
                        length=t,
                        steps=len(beam.word) + 1,
                        word=beam.word,
                        theta=theta,
                    )
                )
        events.sort(key=lambda e: e[0])
        # split offsets, deduplicated within the angular epsilon
        split_offs = []
        for e in events:
            if not split_offs or e[0] - split_offs[-1][0] > ANGULAR_EPS:
                split_offs.append((e[0], e[2], e[3]))
        edges = [(0.0, "lo")] + [(o, (t, ci)) for o, t, ci in split_offs] + [
            (beam.width, "hi")
        ]
        for (off_a, tag_a), (off_b, tag_b) in zip(edges, edges[1:]):
            if off_b - off_a <= 2 * ANGULAR_EPS:
                log.debug("dropping sliver sub-beam of width %.3e", off_b - off_a)
                continue
            child = self._make_child(beam, y, f1, f2, off_a, tag_a, off_b, tag_b)
            if child is None:
                continue
            if self.windows is not None and (
                self.collect_depth == -1 or len(child.word) == self.collect_depth
            ):
                self.windows.append(self._window(child))
            if len(child.word) >= self.N:
                # bounce budget exhausted: the sub-beam retires
                self.dead.append(child)
            elif child.entry_min > self.L:
                # rays are still mid-flight in the parent tile at length L:
                # the sub-interval survives as a live leaf of the parent
                self.live.append(
                    Beam(
                        beam.word,
                        beam.mat,
                        beam.inv,
                        child.lo,
                        child.width,
                        beam.entry_side,
                        child.t_lo,
                        child.t_hi,
                        child.p_lo,
                        child.p_hi,
                        beam.entry_min,
                    )
                )
            else:
                queue.append(child)

    def _make_child(self, beam, y, f1, f2, off_a, tag_a, off_b, tag_b):
        exit_side = self._sample_exit(beam, y, f1, f2, off_a, off_b)
        if exit_side is None:
            log.warning(
                "no exit side found for sub-beam (word=%s, interval %.3g..%.3g)",
                beam.word,
                off_a,
                off_b,
            )
            return None
        side = self.P.sides[exit_side]
        edge_data = []
        for off_e, tag in ((off_a, tag_a), (off_b, tag_b)):
            if isinstance(tag, tuple):
                t_e, ci = tag
                p_e = self.P.corners[ci].point.coords
            else:
                theta_e = (beam.lo + off_e) % TWO_PI
                d_e = _dir_from_param(self.model, f1, f2, theta_e)
                t_start = beam.t_lo if tag == "lo" else beam.t_hi
                found = self._exit_after(y, d_e, side, t_start)
                if found is None:
                    # grazing edge ray: fall back to a conservative bound
                    t_e = max(
                        t_start,
                        _point_segment_distance(
                            self.model,
                            y,
                            self.P.corners[side.start_corner].point.coords,
                            self.P.corners[side.end_corner].point.coords,
                            side.line,
                        ),
                    )
                    p_e = None
                else:
                    t_e, p_e = found
            edge_data.append((t_e, p_e))
        (t_lo, p_lo), (t_hi, p_hi) = edge_data
        entry_min = min(t_lo, t_hi)
        foot = self._foot_candidate(beam, y, f1, f2, side, off_a, off_b)
        if foot is not None:
            entry_min = min(entry_min, foot)
        refl = side.reflection.matrix
        return Beam(
            beam.word + (exit_side,),
            _mat3_mul(beam.mat, refl),
            _mat3_mul(refl, beam.inv),
            (beam.lo + off_a) % TWO_PI,
            off_b - off_a,
            exit_side,
            t_lo,
            t_hi,
            p_lo,
            p_hi,
            max(entry_min, beam.entry_min),
        )

    def _window(self, child: Beam):
        """Unfolded window segment of a freshly created beam (E2 only)."""
        if child.p_lo is None or child.p_hi is None:
            raise IntegrityError("window endpoints unavailable")
        a = _apply_point_raw(self.model, child.mat, child.p_lo)
        b = _apply_point_raw(self.model, child.mat, child.p_hi)
        return (child.lo, a, b, len(child.word))


def split_beams(
    polygon: Polygon,
    z,
    *,
    max_length: Optional[float] = None,
    max_steps: Optional[int] = None,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> SplitResult:
    """Propagate the full circle of rays out of an interior point.

    Returns records of the singular orbits found within the budget plus
    the live beams (cut mid-traversal by the budget) and the dead beams
    (retired because their entry parameter exceeded it).  Records are
    sorted by (length, corner, word) so output is independent of
    processing order.
    """
    if max_length is None and max_steps is None:
        raise ValueError("a max_length or max_steps budget is required")
    p = z.coords if isinstance(z, Point) else tuple(z)
    if not polygon.point_in_table(p) or polygon.distance_to_boundary(p) <= 1e-9:
        raise InvalidBaseError("base point must lie strictly inside the table")
    frame = _frame_raw(polygon.model, p)
    engine = _AngularEngine(
        polygon,
        p,
        frame,
        max_length=math.inf if max_length is None else max_length,
        max_steps=max_steps,
        max_tiles=max_tiles,
        interior_base=True,
    )
    inv = _mat_inverse_raw(polygon.model, _ID3)
    root = Beam((), _ID3, inv, 0.0, TWO_PI, None, 0.0, 0.0, p, p, 0.0)
    return engine.run([root])


def boundary_split_beams(
    polygon: Polygon,
    base: BoundaryPoint,
    *,
    max_steps: int,
    max_length: float = math.inf,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> SplitResult:
    """Beam propagation from a boundary point over the inward half-circle.

    The direction parameter is the outgoing angle alpha in (0, pi),
    measured from the side tangent; grazing rays along the host side are
    not part of the phase fiber.
    """
    model = polygon.model
    if model is not Model.EUCLIDEAN:
        raise NotImplementedError("boundary-map counting is euclidean-only")
    side = polygon.sides[base.side]
    if (
        base.s < 1e-9
        or base.s > side.length - 1e-9
    ):
        raise InvalidBaseError("boundary base point must stay clear of corners")
    p, tangent = polygon.boundary_point_coords(base)
    # frame: e1 along the side, e2 the inward normal (table on the left)
    normal = (-tangent[1], tangent[0])
    engine = _AngularEngine(
        polygon,
        p,
        (tangent, normal),
        max_length=max_length,
        max_steps=max_steps,
        max_tiles=max_tiles,
        interior_base=False,
    )
    root = Beam((), _ID3, _ID3, 0.0, math.pi, None, 0.0, 0.0, p, p, 0.0)
    result = engine.run([root])
    records = [
        SingularOrbitRecord(
            corner=r.corner,
            length=r.length,
            steps=r.steps,
            word=r.word,
            theta=r.theta,
            source_s=base.arclength,
            source_alpha=r.theta,
        )
        for r in result.records
    ]
    records.sort(key=lambda r: r.sort_key())
    return SplitResult(records, result.live, result.dead, result.windows, result.complete)


def corner_wedge_beams(
    polygon: Polygon,
    corner_id: int,
    *,
    max_steps: Optional[int] = None,
    max_length: float = math.inf,
    max_tiles: int = DEFAULT_MAX_TILES,
    collect_depth: Optional[int] = None,
) -> SplitResult:
    """Beam propagation over the interior angular wedge of a corner."""
    corner = polygon.corners[corner_id]
    p = corner.point.coords
    side_out = polygon.sides[corner.side_out]
    tangent = side_out.segment.direction.vec
    model = polygon.model
    if model is Model.EUCLIDEAN:
        normal = (-tangent[1], tangent[0])
    else:
        raise NotImplementedError("corner-wedge propagation is euclidean-only")
    engine = _AngularEngine(
        polygon,
        p,
        (tangent, normal),
        max_length=max_length,
        max_steps=max_steps,
        max_tiles=max_tiles,
        interior_base=False,
        collect_depth=collect_depth,
    )
    root = Beam((), _ID3, _ID3, 0.0, corner.angle, None, 0.0, 0.0, p, p, 0.0)
    return engine.run([root])


def outer_boundary_curve(polygon: Polygon, corner_id: int, k: int):
    """The outer boundary of the table seen from a corner after k segments.

    Every beam alive at exactly k segments contributes the unfolded image
    of its exit side clipped to its angular interval; pieces come back as
    2-point polylines ordered by direction angle.
    """
    if polygon.model is not Model.EUCLIDEAN:
        raise NotImplementedError("outer boundary curves are euclidean-only")
    if k < 1:
        raise ValueError("k must be at least 1")
    result = corner_wedge_beams(
        polygon, corner_id, max_steps=k, collect_depth=k
    )
    windows = sorted(result.windows, key=lambda w: w[0])
    return [(a, b) for _, a, b, _ in windows]


def outer_boundary_curves_upto(polygon: Polygon, corner_id: int, k_max: int):
    """All the curves (1 <= k <= k_max) from one wedge propagation,
    returned as {k: list of 2-point polylines ordered by angle}."""
    if polygon.model is not Model.EUCLIDEAN:
        raise NotImplementedError("outer boundary curves are euclidean-only")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    result = corner_wedge_beams(
        polygon, corner_id, max_steps=k_max, collect_depth=-1
    )
    out = {k: [] for k in range(1, k_max + 1)}
    for lo, a, b, depth in sorted(result.windows, key=lambda w: w[0]):
        out[depth].append((a, b))
    return out


# ---------------------------------------------------------------------------
# corner-image oracle


def corner_images_within(
    polygon: Polygon,
    z,
    L: float,
    *,
    max_word_len: int = 48,
    max_tiles: int = 200_000,
):
    """All corner images of tiles meeting the ball of radius L around z.

    Breadth-first search over tiles by side reflections, pruned when the
    whole tile is farther than L from z; tiles are deduplicated by their
    isometry matrix, so the word tags name one representative chain.
    NOT filtered by visibility; ``realized_singular_records`` does that.
    """
    model = polygon.model
    if model is Model.SPHERICAL:
        raise NotImplementedError(
            "spherical corner images recur along wrapped rays; use split_beams"
        )
    zc = z.coords if isinstance(z, Point) else tuple(z)
    corners = [c.point.coords for c in polygon.corners]
    sides = polygon.sides
    images = []
    visited = set()
    queue = deque([(_ID3, ())])
    visited.add(_matrix_key(_ID3))
    processed = 0
    while queue:
        mat, word = queue.popleft()
        processed += 1
        if processed > max_tiles:
            raise BudgetExceededError(
                f"tile cap {max_tiles} exceeded", partial=images
            )
        g_corners = [_apply_point_raw(model, mat, c) for c in corners]
        if model is not Model.EUCLIDEAN:
            g_corners = [geom._renorm_point_raw(model, c) for c in g_corners]
        dmin = math.inf
        for s in sides:
            a = g_corners[s.start_corner]
            b = g_corners[s.end_corner]
            line = _transformed_line(model, a, b)
            if line is None:
                continue
            dmin = min(
                dmin, _point_segment_distance(model, zc, a, b, line)
            )
        if dmin > L and not _tile_contains(polygon, model, g_corners, zc):
            continue
        for ci, gc in enumerate(g_corners):
            d = _distance_raw(model, zc, gc)
            if d <= L:
                images.append(CornerImage(ci, gc, d, word))
        if len(word) >= max_word_len:
            continue
        for s in sides:
            child = _mat3_mul(mat, s.reflection.matrix)
            key = _matrix_key(child)
            if key in visited:
                continue
            visited.add(key)
            queue.append((child, word + (s.index,)))
    images.sort(key=lambda im: (im.t, im.corner, im.word))
    return images


def _matrix_key(mat):
    return tuple(round(x, 6) for row in mat for x in row)


def _transformed_line(model, a, b):
    try:
        _, u = _initial_tangent_raw(model, a, b)
    except Exception:
        return None
    from .polygon import _side_line

    return _side_line(model, a, u)


def _tile_contains(polygon, model, g_corners, zc):
    from .polygon import _loop_winding

    loops = polygon.loops
    w = _loop_winding(model, [g_corners[i] for i in loops[0]], zc)
    if w is None or abs(abs(w) - 1.0) > 0.25:
        return False
    for li in range(1, len(loops)):
        w = _loop_winding(model, [g_corners[i] for i in loops[li]], zc)
        if w is not None and abs(w) > 0.25:
            return False
    return True


def realized_singular_records(
    polygon: Polygon,
    z,
    L: float,
    *,
    max_word_len: int = 48,
    max_tiles: int = 200_000,
):
    """Visibility-filtered corner images: the singular orbits actually
    realized from z within length L, recomputed independently of the
    beam engine by tracing a ray toward every candidate image.
    """
    zc = z.coords if isinstance(z, Point) else tuple(z)
    model = polygon.model
    images = corner_images_within(
        polygon, zc, L, max_word_len=max_word_len, max_tiles=max_tiles
    )
    seen = set()
    out = []
    for im in images:
        if im.t < 1e-9:
            continue
        try:
            _, u = _initial_tangent_raw(model, zc, im.point)
        except Exception:
            continue
        orbit = trace_ray(
            polygon, zc, u, max_length=im.t + 1e-7, max_steps=4 * max_word_len
        )
        if orbit.status != ENDED_AT_CORNER:
            continue
        if abs(orbit.length - im.t) > 1e-7 * (1.0 + im.t):
            continue
        end_corner = orbit.hits[-1][0].index
        path = unfold_orbit(orbit, check=False)
        if _distance_raw(model, path.points[-1], im.point) > 1e-6:
            continue
        key = (round(orbit.length, 9), end_corner, orbit.word)
        if key in seen:
            continue
        seen.add(key)
        frame = _frame_raw(model, zc)
        theta = _param_angle(model, frame[0], frame[1], u)
        out.append(
            SingularOrbitRecord(
                corner=end_corner,
                length=orbit.length,
                steps=len(orbit.word) + 1,
                word=orbit.word,
                theta=theta,
            )
        )
    out.sort(key=lambda r: r.sort_key())
    return out


# ---------------------------------------------------------------------------
# parallel beams (fixed direction, euclidean billiard map)


class ParallelBeam:
    """Rays of one fixed direction sharing a side word (euclidean only).

    The transverse coordinate u is the signed offset along the unit
    vector perpendicular to the direction; intervals are half-open and
    singular phase points belong to neither sub-beam.
    """

    __slots__ = ("word", "mat", "inv", "u_lo", "u_hi", "entry_side", "origin_side")

    def __init__(self, word, mat, inv, u_lo, u_hi, entry_side, origin_side):
        self.word = word
        self.mat = mat
        self.inv = inv
        self.u_lo = u_lo
        self.u_hi = u_hi
        self.entry_side = entry_side
        self.origin_side = origin_side

    @property
    def width(self):
        return self.u_hi - self.u_lo

    def __repr__(self):
        return (
            f"ParallelBeam(word={self.word}, u=[{self.u_lo:.6f}, {self.u_hi:.6f}), "
            f"origin={self.origin_side})"
        )


U_EPS = 1e-12


def parallel_split_beams(
    polygon: Polygon,
    theta: float,
    max_steps: int,
    *,
    max_tiles: int = DEFAULT_MAX_TILES,
) -> SplitResult:
    """Propagate parallel beams of direction theta through the billiard map.

    One beam per side on which the direction points inward; a corner
    image inside a beam's transverse interval at bounce k is a singular
    orbit of combinatorial length k+1 and removes exactly that phase
    point (its first singularity).
    """
    from .errors import ExceptionalDirectionError

    if polygon.model is not Model.EUCLIDEAN:
        raise NotImplementedError("direction counting is euclidean-only")
    tv = (math.cos(theta), math.sin(theta))
    pv = (-tv[1], tv[0])
    # the direction must be transversal to every side
    for side in polygon.sides:
        if abs(_cross2(side.segment.direction.vec, tv)) < 1e-12:
            raise ExceptionalDirectionError(
                f"direction {theta:.9f} is parallel to side {side.index}"
            )
    seeds = []
    for side in polygon.sides:
        if _cross2(side.segment.direction.vec, tv) <= 0:
            continue  # direction points outward here
        a, b = polygon.side_points(side.index)
        ua = a[0] * pv[0] + a[1] * pv[1]
        ub = b[0] * pv[0] + b[1] * pv[1]
        lo, hi = (ua, ub) if ua < ub else (ub, ua)
        seeds.append(
            ParallelBeam((), _ID3, _ID3, lo, hi, side.index, side.index)
        )
    records: list[SingularOrbitRecord] = []
    live: list[ParallelBeam] = []
    dead: list[ParallelBeam] = []
    queue = deque(seeds)
    processed = 0
    while queue:
        beam = queue.popleft()
        processed += 1
        if processed > max_tiles:
            records.sort(key=lambda r: r.sort_key())
            raise BudgetExceededError(
                f"beam cap {max_tiles} exceeded",
                partial=SplitResult(records, live, dead, complete=False),
            )
        _process_parallel(
            polygon, beam, tv, pv, max_steps, records, live, dead, queue
        )
    records.sort(key=lambda r: r.sort_key())
    return SplitResult(records, live, dead)


def _parallel_entry_point(polygon, beam, u, pv):
    """Home-coordinates point of the beam's entry side at transverse u."""
    a, b = polygon.side_points(beam.entry_side)
    mat = beam.mat
    ax = mat[0][0] * a[0] + mat[0][1] * a[1] + mat[0][2]
    ay = mat[1][0] * a[0] + mat[1][1] * a[1] + mat[1][2]
    bx = mat[0][0] * b[0] + mat[0][1] * b[1] + mat[0][2]
    by = mat[1][0] * b[0] + mat[1][1] * b[1] + mat[1][2]
    ua = ax * pv[0] + ay * pv[1]
    ub = bx * pv[0] + by * pv[1]
    tau = (u - ua) / (ub - ua)
    tau = min(max(tau, 0.0), 1.0)
    return (a[0] + tau * (b[0] - a[0]), a[1] + tau * (b[1] - a[1])), tau


def _process_parallel(polygon, beam, tv, pv, max_steps, records, live, dead, queue):
    model = polygon.model
    inv = beam.inv
    d_home = (
        inv[0][0] * tv[0] + inv[0][1] * tv[1],
        inv[1][0] * tv[0] + inv[1][1] * tv[1],
    )
    n = math.hypot(*d_home)
    d_home = (d_home[0] / n, d_home[1] / n)
    events = []
    for c in polygon.corners:
        v = c.point.coords
        w = _apply_point_raw(model, beam.mat, v)
        u_w = w[0] * pv[0] + w[1] * pv[1]
        if not (beam.u_lo + U_EPS < u_w < beam.u_hi - U_EPS):
            continue
        p_in, _ = _parallel_entry_point(polygon, beam, u_w, pv)
        expected = math.hypot(v[0] - p_in[0], v[1] - p_in[1])
        if expected < 1e-12:
            continue  # entry already at the corner: grazing, skip
        try:
            hit = first_hit(polygon, p_in, d_home)
        except IntegrityError:
            continue
        if hit.kind != "corner" or hit.index != c.index:
            continue
        if abs(hit.t - expected) > 1e-7 * (1.0 + expected):
            continue
        events.append((u_w, c.index, w))
    events.sort(key=lambda e: e[0])
    # records + split offsets (deduplicated within U_EPS)
    splits = []
    origin_side = polygon.sides[beam.origin_side]
    oa, ob = polygon.side_points(beam.origin_side)
    u0a = oa[0] * pv[0] + oa[1] * pv[1]
    u0b = ob[0] * pv[0] + ob[1] * pv[1]
    for u_w, ci, w in events:
        tau0 = (u_w - u0a) / (u0b - u0a)
        x0 = (oa[0] + tau0 * (ob[0] - oa[0]), oa[1] + tau0 * (ob[1] - oa[1]))
        length = (w[0] - x0[0]) * tv[0] + (w[1] - x0[1]) * tv[1]
        ot = origin_side.segment.direction.vec
        alpha = math.atan2(_cross2(ot, tv), _dot2(ot, tv)) % TWO_PI
        records.append(
            SingularOrbitRecord(
                corner=ci,
                length=length,
                steps=len(beam.word) + 1,
                word=beam.word,
                theta=math.atan2(tv[1], tv[0]) % TWO_PI,
                u=u_w,
                source_s=polygon.side_offsets[beam.origin_side]
                + tau0 * origin_side.length,
                source_alpha=alpha,
            )
        )
        if not splits or u_w - splits[-1] > U_EPS:
            splits.append(u_w)
    cuts = [beam.u_lo] + splits + [beam.u_hi]
    is_live = False
    for ua, ub in zip(cuts, cuts[1:]):
        if ub - ua <= 2 * U_EPS:
            continue
        exit_side = None
        for frac in (0.5, 0.37, 0.63, 0.21, 0.79):
            um = ua + (ub - ua) * frac
            p_in, _ = _parallel_entry_point(polygon, beam, um, pv)
            try:
                hit = first_hit(polygon, p_in, d_home)
            except IntegrityError:
                continue
            if hit.kind == "side":
                exit_side = hit.index
                break
        if exit_side is None:
            log.warning("no exit side for parallel sub-beam %s", beam.word)
            continue
        refl = polygon.sides[exit_side].reflection.matrix
        child = ParallelBeam(
            beam.word + (exit_side,),
            _mat3_mul(beam.mat, refl),
            _mat3_mul(refl, beam.inv),
            ua,
            ub,
            exit_side,
            beam.origin_side,
        )
        if len(child.word) >= max_steps:
            dead.append(child)
            is_live = True
        else:
            queue.append(child)
    if is_live:
        live.append(beam)
