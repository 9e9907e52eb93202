"""Acceptance suite: every criterion at its stated tolerance.

Each check returns an AcceptanceResult; ``run_all`` prints one pass/fail
line per criterion.  All randomness is seeded, so the suite is fully
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .complexity import (
    PuncturedGraph,
    bridge_constants,
    component_bounds_check,
    direction_complexity_map,
    position_complexity_flow,
)
from .counting import (
    direction_counting_map,
    position_counting_flow,
    total_optical_length,
)
from .geom import Model, _frame_raw
from .shapes import (
    hyperbolic_equilateral,
    random_interior_point,
    random_triangle,
    spherical_octant,
    unit_square,
)
from .stats import (
    Kind,
    ae_tail_check,
    closed_form_average,
    mc_average,
    mc_average_position_map,
    quadratic_bound_fit,
    sample_table_point,
    zeta,
)
from .unfold import (
    outer_boundary_curves_upto,
    realized_singular_records,
    split_beams,
    trace_ray,
    unfold_orbit,
)

SQRT2_HALF = math.sqrt(2.0) / 2.0


@dataclass
class AcceptanceResult:
    name: str
    passed: bool
    detail: str


def a1_direction_average(fast=False) -> AcceptanceResult:
    """Unit square, n=50, 200 directions: mean gd/n within 5% of 1."""
    square = unit_square()
    n, samples = 50, (60 if fast else 200)
    est = mc_average(square, Kind.DIRECTION_MAP, n, samples, seed=101)
    ratio = est.mean / n
    passed = abs(ratio - 1.0) <= 0.05
    return AcceptanceResult(
        "A1 direction average",
        passed,
        f"mean gd/n = {ratio:.4f} over {samples} directions (target 1.00 +- 5%)",
    )


def a2_position_flow_average(fast=False) -> AcceptanceResult:
    """Unit square, l=2, 2000 samples: mean within 3 SE of 4*pi."""
    square = unit_square()
    samples = 300 if fast else 2000
    est = mc_average(square, Kind.POSITION_FLOW, 2.0, samples, seed=102)
    target = 4.0 * math.pi
    z = est.z_score(target)
    passed = abs(z) <= 3.0
    return AcceptanceResult(
        "A2 position-flow average",
        passed,
        f"mean = {est.mean:.4f} vs 4*pi = {target:.4f}, z = {z:+.2f} "
        f"({samples} samples, SE {est.standard_error:.4f})",
    )


def a3_spherical_average(fast=False) -> AcceptanceResult:
    """Octant: MC within 3 SE of the closed form at l in {1, 2, pi};
    zeta vanishes at 0, pi/2 and pi."""
    octant = spherical_octant()
    samples = 80 if fast else 300
    parts, passed = [], True
    for l in (1.0, 2.0, math.pi):
        est = mc_average(octant, Kind.POSITION_FLOW, l, samples, seed=103)
        cf = closed_form_average(octant, Kind.POSITION_FLOW, l)
        z = est.z_score(cf.normalized)
        passed &= abs(z) <= 3.0
        parts.append(f"l={l:.3f}: mean {est.mean:.3f} vs {cf.normalized:.3f} (z {z:+.2f})")
    zeros = max(abs(zeta(0.0)), abs(zeta(math.pi / 2)), abs(zeta(math.pi)))
    passed &= zeros <= 1e-12
    parts.append(f"|zeta(0, pi/2, pi)| <= {zeros:.1e}")
    return AcceptanceResult("A3 spherical average", passed, "; ".join(parts))


def a4_hyperbolic_average(fast=False) -> AcceptanceResult:
    """Angles-pi/4 triangle: MC within 3 SE of (3pi/4)(cosh l - 1)/area,
    with the paper's printed cosh-l variant reported alongside."""
    tri = hyperbolic_equilateral(math.pi / 4)
    samples = 60 if fast else 220
    parts, passed = [], True
    for l in (1.0, 2.0, 3.0):
        est = mc_average(tri, Kind.POSITION_FLOW, l, samples, seed=104)
        cf = closed_form_average(tri, Kind.POSITION_FLOW, l)
        z = est.z_score(cf.normalized)
        z_printed = est.z_score(cf.printed_total / tri.area)
        passed &= abs(z) <= 3.0
        parts.append(
            f"l={l}: mean {est.mean:.3f} vs {cf.normalized:.3f} "
            f"(z {z:+.2f}; printed cosh-l form z {z_printed:+.1f})"
        )
    return AcceptanceResult("A4 hyperbolic average", passed, "; ".join(parts))


def a5_bridge(fast=False) -> AcceptanceResult:
    """h - gc stabilizes; square center gives h0 = 0 at l0 = sqrt(2)/2."""
    square = unit_square()
    g = position_counting_flow(square, (0.5, 0.5), 3.0)
    h = position_complexity_flow(square, (0.5, 0.5), 3.0, series=g)
    l0, h0, stab = bridge_constants(h, g)
    passed = stab and h0 == 0 and abs(l0 - SQRT2_HALF) <= 1e-9
    detail = [f"center: h0={h0}, l0={l0:.9f} (target {SQRT2_HALF:.9f}), stabilized={stab}"]
    rng = np.random.default_rng(105)
    n_points = 5 if fast else 20
    flow_ok = 0
    for _ in range(n_points):
        z = random_interior_point(square, rng, margin=0.02)
        g = position_counting_flow(square, z, 3.0)
        h = position_complexity_flow(square, z, 3.0, series=g)
        _, _, stab = bridge_constants(h, g)
        flow_ok += stab
    detail.append(f"{flow_ok}/{n_points} random points stabilized (flow, L=3)")
    passed &= flow_ok == n_points
    map_ok = 0
    for _ in range(n_points):
        theta = rng.uniform(0.0, 2.0 * math.pi)
        g = direction_counting_map(square, theta, 50)
        f = direction_complexity_map(square, theta, 50, series=g)
        _, _, stab = bridge_constants(f, g)
        map_ok += stab
    detail.append(f"{map_ok}/{n_points} random directions stabilized (map, N=50)")
    passed &= map_ok == n_points
    return AcceptanceResult("A5 complexity/counting bridge", passed, "; ".join(detail))


def _random_multigraph(rng):
    n = int(rng.integers(2, 13))
    vertices = list(range(n))
    forest = bool(rng.random() < 0.4)
    edges = []
    if forest:
        order = [int(x) for x in rng.permutation(n)]
        for i in range(1, n):
            if rng.random() < 0.15:
                continue  # leave some vertices for other trees
            j = int(rng.integers(0, i))
            edges.append((order[i], order[j]))
        attached = {v for e in edges for v in e}
        vertices = sorted(attached) if attached else [0, 1]
        if not edges:
            edges = [(vertices[0], vertices[-1])]
    else:
        m = int(rng.integers(n - 1, 2 * n + 3))
        for _ in range(m):
            u = int(rng.integers(0, n))
            v = int(rng.integers(0, n))
            edges.append((u, v))
        attached = {v for e in edges for v in e}
        vertices = sorted(attached)
    g = PuncturedGraph(vertices, edges)
    pts = []
    for v in vertices:
        if rng.random() < 0.25:
            pts.append(("vertex", v))
    for i in range(len(edges)):
        for frac in sorted(set(np.round(rng.uniform(0.05, 0.95, rng.integers(0, 3)), 6))):
            pts.append(("edge", i, float(frac)))
    return g, pts


def a6_graph_lemma(fast=False) -> AcceptanceResult:
    """Component bounds on 1000 random multigraphs; forest equality."""
    rng = np.random.default_rng(106)
    trials = 200 if fast else 1000
    forests = 0
    for _ in range(trials):
        g, pts = _random_multigraph(rng)
        lower, actual, upper, is_forest = component_bounds_check(g, pts)
        # component_bounds_check raises on any violation
        forests += is_forest
    return AcceptanceResult(
        "A6 graph component lemma",
        True,
        f"{trials} random multigraphs checked ({forests} forests, equality verified)",
    )


def a7_oracle_equivalence(fast=False) -> AcceptanceResult:
    """split_beams records match the visibility-filtered corner-image
    oracle as multisets, lengths within 1e-9."""
    rng = np.random.default_rng(107)
    polys = [("square", unit_square()), ("triangle", random_triangle(rng))]
    n_points = 2 if fast else 5
    checked = 0
    for name, poly in polys:
        for _ in range(n_points):
            z = random_interior_point(poly, rng, margin=0.02)
            engine = split_beams(poly, z, max_length=3.0).records
            oracle = realized_singular_records(poly, z, 3.0)
            if len(engine) != len(oracle):
                return AcceptanceResult(
                    "A7 oracle equivalence",
                    False,
                    f"{name}: {len(engine)} engine records vs {len(oracle)} oracle",
                )
            for e, o in zip(engine, oracle):
                if (
                    e.corner != o.corner
                    or e.word != o.word
                    or abs(e.length - o.length) > 1e-9
                ):
                    return AcceptanceResult(
                        "A7 oracle equivalence",
                        False,
                        f"{name}: record mismatch {e} vs {o}",
                    )
            checked += len(engine)
    return AcceptanceResult(
        "A7 oracle equivalence",
        True,
        f"{2 * n_points} base points, {checked} records matched within 1e-9",
    )


def a8_unfolding_integrity(fast=False) -> AcceptanceResult:
    """1000 random orbits (<= 20 bounces) unfold onto geodesics within 1e-8."""
    rng = np.random.default_rng(108)
    tables = [unit_square(), spherical_octant(), hyperbolic_equilateral(math.pi / 4)]
    budgets = [6.0, 7.0, 6.0]
    per_table = 70 if fast else 334
    worst = 0.0
    count = 0
    for poly, max_len in zip(tables, budgets):
        for _ in range(per_table):
            z = random_interior_point(poly, rng, margin=1e-3)
            theta = rng.uniform(0.0, 2.0 * math.pi)
            frame = _frame_raw(poly.model, z if isinstance(z, tuple) else z)
            d = tuple(
                math.cos(theta) * a + math.sin(theta) * b
                for a, b in zip(frame[0], frame[1])
            )
            orbit = trace_ray(poly, z, d, max_length=max_len, max_steps=20)
            path = unfold_orbit(orbit, check=False)
            worst = max(worst, path.residual)
            count += 1
    passed = worst < 1e-8
    return AcceptanceResult(
        "A8 unfolding integrity",
        passed,
        f"{count} orbits across three geometries, worst residual {worst:.2e} (< 1e-8)",
    )


def a9_boundary_curve_theorem(fast=False) -> AcceptanceResult:
    """Boundary integrals of gd_s/god_s match the outer-boundary sums."""
    square = unit_square()
    samples = 60 if fast else 250
    parts, passed = [], True
    for n in (1, 2, 3):
        cmpn = mc_average_position_map(square, 0, n, samples, seed=109)
        z_pure, z_opt = cmpn.z_scores()
        passed &= abs(z_pure) <= 3.0 and abs(z_opt) <= 3.0
        parts.append(
            f"n={n}: pure {cmpn.pure.mean:.3f} vs {cmpn.rhs_pure:.3f} (z {z_pure:+.2f}), "
            f"optical {cmpn.optical.mean:.3f} vs {cmpn.rhs_optical:.3f} (z {z_opt:+.2f})"
        )
        if n == 1:
            exact = abs(cmpn.rhs_pure - 2.0) <= 1e-12
            passed &= exact
            parts.append(f"n=1 rhs = {cmpn.rhs_pure!r} (exactly 2: {exact})")
    return AcceptanceResult("A9 boundary-curve theorem", passed, "; ".join(parts))


def a10_quadratic_growth(fast=False) -> AcceptanceResult:
    """Optical outer-boundary sums grow quadratically: c2/c1 < 3 on [20, 40]."""
    square = unit_square()
    n_max = 40
    sums = {}
    total = 0.0
    per_corner = []
    for corner in range(square.num_corners):
        per_corner.append(outer_boundary_curves_upto(square, corner, n_max))
    for k in range(1, n_max + 1):
        for corner in range(square.num_corners):
            vp = square.corners[corner].point.coords
            pieces = per_corner[corner][k]
            if pieces:
                total += total_optical_length(pieces, vp)
        sums[k] = total
    tail = [(n, sums[n]) for n in range(20, n_max + 1)]
    fit = quadratic_bound_fit(tail)
    passed = fit.c1 > 0 and fit.ratio < 3.0
    return AcceptanceResult(
        "A10 quadratic growth",
        passed,
        f"c1 = {fit.c1:.4f}, c2 = {fit.c2:.4f}, ratio = {fit.ratio:.3f} "
        f"over n in [20, 40] (< 3)",
    )


def a11_tail_bound(fast=False) -> AcceptanceResult:
    """Violation fraction of the log-corrected tail bound <= 5% for the
    direction family (T=20, n<=100) and the position family (T=1, l<=6)."""
    square = unit_square()
    kappa = square.kappa()
    eps = 0.5
    rng = np.random.default_rng(111)
    n_samples = 40 if fast else 200
    n_budget = 40 if fast else 100
    ts_n = np.arange(1, n_budget + 1, dtype=float)
    avg_n = math.pi * kappa * ts_n
    curves = []
    while len(curves) < n_samples:
        theta = rng.uniform(0.0, 2.0 * math.pi)
        try:
            series = direction_counting_map(square, theta, n_budget)
        except Exception:
            continue
        curves.append([series.value(t) for t in ts_n])
    res_dir = ae_tail_check(ts_n, curves, avg_n, eps, T=20 if not fast else 10)
    l_budget = 4.0 if fast else 6.0
    ts_l = np.linspace(0.05, l_budget, 120)
    avg_l = math.pi * kappa * ts_l**2 / 2.0
    curves = []
    while len(curves) < n_samples:
        z = sample_table_point(square, rng)
        try:
            series = position_counting_flow(square, z, l_budget)
        except Exception:
            continue
        curves.append([series.value(t) for t in ts_l])
    res_pos = ae_tail_check(ts_l, curves, avg_l, eps, T=1.0)
    passed = res_dir.violation_fraction <= 0.05 and res_pos.violation_fraction <= 0.05
    return AcceptanceResult(
        "A11 a.e. tail bound",
        passed,
        f"direction family: {res_dir.violation_fraction:.1%} violations "
        f"({res_dir.n_violations}/{res_dir.n_samples}); position family: "
        f"{res_pos.violation_fraction:.1%} ({res_pos.n_violations}/{res_pos.n_samples})",
    )


def a12_spherical_density_identity(fast=False) -> AcceptanceResult:
    """(2/pi) l + zeta(l mod pi) equals the integral of |sin t| within 1e-10."""
    rng = np.random.default_rng(112)
    trials = 25 if fast else 100
    worst = 0.0
    for _ in range(trials):
        l = rng.uniform(0.0, 4.0 * math.pi)
        closed = (2.0 / math.pi) * l + zeta(l - math.pi * math.floor(l / math.pi))
        breaks = [k * math.pi for k in range(0, 5) if k * math.pi < l]
        numeric, _ = quad(
            lambda t: abs(math.sin(t)), 0.0, l, points=breaks, limit=200
        )
        worst = max(worst, abs(closed - numeric))
    passed = worst <= 1e-10
    return AcceptanceResult(
        "A12 spherical density identity",
        passed,
        f"{trials} random l in [0, 4pi], worst deviation {worst:.2e} (<= 1e-10)",
    )


ALL_CRITERIA = [
    a1_direction_average,
    a2_position_flow_average,
    a3_spherical_average,
    a4_hyperbolic_average,
    a5_bridge,
    a6_graph_lemma,
    a7_oracle_equivalence,
    a8_unfolding_integrity,
    a9_boundary_curve_theorem,
    a10_quadratic_growth,
    a11_tail_bound,
    a12_spherical_density_identity,
]


def run_all(fast: bool = False):
    results = []
    for check in ALL_CRITERIA:
        results.append(check(fast=fast))
    return results


def main():
    results = run_all()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
