"""Partial complexities and the punctured-graph combinatorics behind them.

The base set of a partial complexity is a graph (the direction circle at
an interior point, or the disjoint side intervals of a fixed direction);
singular parameters puncture it, and the complexity is the number of
connected components of the punctured base.  The component-count lemma
    chi(R) + sum val(x_i)  <=  c(R minus punctures)  <=  c(R) + sum val(x_i)
(with equality on the right for forests) is implemented on explicit
multigraphs and doubles as an independent oracle for the beam counts.
"""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from typing import Optional, Sequence

from .errors import IntegrityError, NotPunctureError
from .counting import CountingSeries, direction_counting_map, position_counting_flow
from .polygon import Polygon

TWO_PI = 2.0 * math.pi


class PuncturedGraph:
    """Finite multigraph with point-removal semantics.

    Vertices are hashables; edges are (u, v) pairs, multi-edges and
    self-loops allowed.  Isolated vertices are rejected (every vertex
    must carry at least one edge end).
    """

    def __init__(self, vertices: Sequence, edges: Sequence):
        self.vertices = list(vertices)
        self.edges = [tuple(e) for e in edges]
        vset = set(self.vertices)
        degree = defaultdict(int)
        for u, v in self.edges:
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u}, {v}) uses an unknown vertex")
            degree[u] += 1
            degree[v] += 1
        for v in self.vertices:
            if degree[v] == 0:
                raise ValueError(f"vertex {v} is isolated")
        self.degree = dict(degree)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges

    def components(self) -> int:
        return _count_components(self.vertices, self.edges)

    def betti(self):
        """(h0, h1) with h0 = components and h1 = h0 - chi."""
        h0 = self.components()
        return h0, h0 - self.euler_characteristic()

    def is_forest(self) -> bool:
        return self.betti()[1] == 0


def _count_components(vertices, edges):
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(v) for v in vertices})


def valence(graph: PuncturedGraph, point) -> int:
    """Number of edge ends at the point, minus one.

    Points are ('vertex', v) or ('edge', edge_index, fraction) with the
    fraction strictly inside (0, 1); edge-interior points have valence 1.
    """
    kind = point[0]
    if kind == "vertex":
        v = point[1]
        if v not in graph.degree:
            raise NotPunctureError(f"vertex {v!r} not in graph")
        return graph.degree[v] - 1
    if kind == "edge":
        idx, frac = point[1], point[2]
        if not 0 <= idx < graph.n_edges:
            raise NotPunctureError(f"edge index {idx} out of range")
        if not 0.0 < frac < 1.0:
            raise NotPunctureError("edge-interior fraction must be in (0, 1)")
        return 1
    raise NotPunctureError(f"unknown puncture kind {kind!r}")


def puncture(graph: PuncturedGraph, points: Sequence) -> PuncturedGraph:
    """Remove the points: each removed point x becomes 1 + val(x) dangling
    vertices, one per incident edge end.  The result is independent of the
    removal order."""
    pts = list(points)
    if len(set(pts)) != len(pts):
        raise NotPunctureError("puncture points must be distinct")
    for p in pts:
        valence(graph, p)  # validates
    removed_vertices = {p[1] for p in pts if p[0] == "vertex"}
    edge_cuts = defaultdict(list)
    for p in pts:
        if p[0] == "edge":
            edge_cuts[p[1]].append(p[2])

    fresh = [0]

    def dangle():
        fresh[0] += 1
        return ("_dangle", fresh[0])

    vertices = [v for v in graph.vertices if v not in removed_vertices]
    edges = []

    def endpoint(v):
        if v in removed_vertices:
            w = dangle()
            vertices.append(w)
            return w
        return v

    for idx, (u, v) in enumerate(graph.edges):
        cuts = sorted(edge_cuts.get(idx, []))
        if not cuts:
            edges.append((endpoint(u), endpoint(v)))
            continue
        # split the edge at interior punctures; each cut leaves two loose ends
        left = endpoint(u)
        for _ in cuts:
            right = dangle()
            vertices.append(right)
            edges.append((left, right))
            left = dangle()
            vertices.append(left)
        edges.append((left, endpoint(v)))
    return PuncturedGraph(vertices, edges)


def component_bounds_check(graph: PuncturedGraph, points: Sequence):
    """(lower, actual, upper, is_forest) for the component-count bounds.

    lower = chi(R) + sum val, upper = c(R) + sum val; for forests the
    actual count must equal the upper bound and this is asserted.
    """
    vals = sum(valence(graph, p) for p in points)
    lower = graph.euler_characteristic() + vals
    upper = graph.components() + vals
    actual = puncture(graph, points).components() if points else graph.components()
    forest = graph.is_forest()
    if not (lower <= actual <= upper):
        raise IntegrityError(
            f"component bounds violated: {lower} <= {actual} <= {upper} is false"
        )
    if forest and actual != upper:
        raise IntegrityError(
            f"forest equality violated: {actual} != {upper}"
        )
    return lower, actual, upper, forest


# ---------------------------------------------------------------------------
# complexity series


class ComplexitySeries:
    """Integer-valued step function given by breakpoints.

    value(x) is constant between breakpoints and right-continuous;
    ``initial`` is the value on [0, first breakpoint).
    """

    def __init__(self, initial: int, breakpoints, meta: Optional[dict] = None):
        self.initial = int(initial)
        self.breakpoints = sorted((float(x), int(v)) for x, v in breakpoints)
        self._xs = [x for x, _ in self.breakpoints]
        self._vs = [v for _, v in self.breakpoints]
        self.meta = dict(meta or {})

    def value(self, x: float) -> int:
        i = bisect.bisect_right(self._xs, x)
        return self._vs[i - 1] if i else self.initial

    __call__ = value

    def abscissae(self):
        return list(self._xs)

    def to_dict(self):
        return {
            "initial": self.initial,
            "breakpoints": [[x, v] for x, v in self.breakpoints],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(payload["initial"], payload["breakpoints"], payload.get("meta"))


def position_complexity_flow(
    polygon: Polygon,
    z,
    max_length: float,
    *,
    series: Optional[CountingSeries] = None,
    **kwargs,
) -> ComplexitySeries:
    """h_z(l): homotopy classes of regular flow orbits of length l from z.

    Classes are the maximal direction intervals free of singular
    directions of length <= l: the circle punctured at the recorded
    directions.  Pass a precomputed counting series to avoid re-running
    the beam engine.
    """
    if series is None:
        series = position_counting_flow(polygon, z, max_length, **kwargs)
    seen = set()
    events = []
    for r in series.records:
        if r.theta in seen:
            continue
        seen.add(r.theta)
        events.append(r.length)
    events.sort()
    breakpoints = []
    for i, x in enumerate(events):
        # the first puncture breaks the circle without adding a component
        breakpoints.append((x, max(1, i + 1)))
    return ComplexitySeries(
        1, breakpoints, meta={"kind": "position-flow", "budget": max_length}
    )


def flow_complexity_via_graph(series: CountingSeries, l: float) -> int:
    """Independent graph-path evaluation of h_z(l): puncture an explicit
    circle multigraph at the singular directions and count components."""
    circle = PuncturedGraph(["a", "b"], [("a", "b"), ("b", "a")])
    thetas = sorted({r.theta for r in series.records if r.length <= l})
    pts = []
    for th in thetas:
        th = th % TWO_PI
        if th < 1e-15 or abs(th - math.pi) < 1e-15:
            # puncture lands on a graph vertex (valence 1 there as well)
            pts.append(("vertex", "a" if th < 1e-15 else "b"))
        elif th < math.pi:
            pts.append(("edge", 0, th / math.pi))
        else:
            pts.append(("edge", 1, (th - math.pi) / math.pi))
    return puncture(circle, pts).components() if pts else 1


def direction_complexity_map(
    polygon: Polygon,
    theta: float,
    max_steps: int,
    *,
    series: Optional[CountingSeries] = None,
    **kwargs,
) -> ComplexitySeries:
    """fd_theta(n): atoms of the n-step coding partition of the fiber.

    The base is the disjoint union of the sides on which the direction
    points inward (a forest of segments); each singular phase point
    punctures its interval, so the count is exactly
    (number of inward sides) + (distinct punctures through step n).
    """
    if series is None:
        series = direction_counting_map(polygon, theta, max_steps, **kwargs)
    base_components = _inward_side_count(polygon, theta)
    by_step = defaultdict(set)
    for r in series.records:
        by_step[r.steps].add((r.source_s, r.u))
    seen = set()
    breakpoints = []
    count = base_components
    for n in sorted(by_step):
        new = [p for p in by_step[n] if p not in seen]
        seen.update(by_step[n])
        count += len(new)
        breakpoints.append((n, count))
    return ComplexitySeries(
        base_components,
        breakpoints,
        meta={"kind": "direction-map", "theta": theta, "budget": max_steps},
    )


def _inward_side_count(polygon: Polygon, theta: float) -> int:
    from .geom import _cross2

    tv = (math.cos(theta), math.sin(theta))
    return sum(
        1
        for s in polygon.sides
        if _cross2(s.segment.direction.vec, tv) > 0
    )


# ---------------------------------------------------------------------------
# complexity / counting bridge


def bridge_constants(h: ComplexitySeries, g: CountingSeries):
    """Smallest abscissa beyond which h - g is constant.

    Returns (x0, constant, stabilized); ``stabilized`` is False when the
    difference only settles at the very last breakpoint, i.e. constancy
    was never confirmed by a later event within the computed budget.
    """
    xs = sorted(set(h.abscissae()) | set(g.abscissae()))
    if not xs:
        return 0.0, h.value(0) - g.value(0), True
    diffs = [h.value(x) - g.value(x) for x in xs]
    final = diffs[-1]
    i = len(diffs) - 1
    while i > 0 and diffs[i - 1] == final:
        i -= 1
    if i == 0 and h.value(0) - g.value(0) == final:
        return 0.0, final, True
    x0 = xs[i]
    stabilized = i < len(xs) - 1
    return x0, final, stabilized
