"""Batch experiment runner.

Parses polygon spec files, dispatches counting / complexity / average /
verification experiments and emits deterministic JSON or CSV payloads
(no timestamps: two runs with the same config are byte-identical).

Exit codes are documented in docs/formats.md:
    0 success, 2 I/O or schema error, 3 polygon validation error,
    4 budget exceeded (partial results written), 5 exceptional parameter,
    6 invalid base or degenerate input, 7 internal integrity error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

from . import __version__
from .errors import (
    BilliardError,
    BudgetExceededError,
    ExceptionalBasepointError,
    ExceptionalDirectionError,
    IntegrityError,
    InvalidBaseError,
    PolygonValidationError,
)
from .geom import Model
from .polygon import Polygon, validate_polygon, coxeter_matrix, angle_area_identity
from .counting import (
    CountingSeries,
    direction_counting_map,
    position_counting_flow,
    position_counting_map,
)
from .complexity import (
    bridge_constants,
    direction_complexity_map,
    position_complexity_flow,
)
from .stats import (
    Kind,
    ae_tail_check,
    closed_form_average,
    mc_average,
    mc_average_position_map,
)
from .unfold import DEFAULT_MAX_TILES

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_EXCEPTIONAL = 5
EXIT_INVALID_BASE = 6
EXIT_INTEGRITY = 7


def parse_polygon_file(path: str) -> Polygon:
    """Load and validate a polygon spec file.

    Schema: {"model": "euclidean"|"spherical"|"hyperbolic",
             "loops": [[[coords...], ...], ...]}
    with the first loop the counterclockwise outer boundary and obstacle
    loops clockwise (table always on the left of the traversal).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise SystemExit(_fail(EXIT_SCHEMA, f"cannot read {path}: {exc}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(EXIT_SCHEMA, f"malformed JSON in {path}: {exc}"))
    if not isinstance(payload, dict) or "model" not in payload or "loops" not in payload:
        raise SystemExit(
            _fail(EXIT_SCHEMA, f"{path}: expected object with 'model' and 'loops'")
        )
    try:
        model = Model.from_name(payload["model"])
        polygon = validate_polygon(payload["loops"], model)
    except PolygonValidationError as exc:
        raise SystemExit(_fail(EXIT_VALIDATION, f"{path}: {exc}"))
    except (ValueError, TypeError) as exc:
        raise SystemExit(_fail(EXIT_SCHEMA, f"{path}: {exc}"))
    polygon.source_payload = payload
    return polygon


def polygon_hash(polygon: Polygon) -> str:
    payload = getattr(polygon, "source_payload", None)
    if payload is None:
        payload = {
            "model": polygon.model.name.lower(),
            "loops": [
                [list(polygon.corners[ci].point.coords) for ci in loop]
                for loop in polygon.loops
            ],
        }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _envelope(args, polygon, command, budget, complete=True):
    return {
        "tool": "ccbilliards",
        "version": __version__,
        "command": command,
        "polygon_sha256": polygon_hash(polygon),
        "seed": getattr(args, "seed", None),
        "budget": budget,
        "complete": complete,
    }


def _emit(args, payload, csv_text=None):
    if args.format == "csv":
        text = csv_text if csv_text is not None else _dict_to_csv(payload)
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dict_to_csv(payload):
    import csv as _csv
    import io

    buf = io.StringIO()
    writer = _csv.writer(buf)
    flat = _flatten(payload)
    writer.writerow(["key", "value"])
    for k, v in flat:
        writer.writerow([k, v])
    return buf.getvalue()


def _flatten(obj, prefix=""):
    out = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.extend(_flatten(obj[k], f"{prefix}{k}."))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}{i}."))
    else:
        out.append((prefix[:-1], obj))
    return out


def _parse_coords(text, model):
    parts = [float(x) for x in text.split(",")]
    need = 2 if model is Model.EUCLIDEAN else 3
    if len(parts) != need:
        raise SystemExit(
            _fail(EXIT_SCHEMA, f"base point needs {need} coordinates for this model")
        )
    return tuple(parts)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_count_position(args):
    polygon = parse_polygon_file(args.polygon)
    z = _parse_coords(args.z, polygon.model)
    try:
        series = position_counting_flow(
            polygon, z, args.l, max_tiles=args.max_tiles
        )
        complete = True
    except BudgetExceededError as exc:
        series = CountingSeries(
            exc.partial.records, "length", complete=False
        )
        complete = False
    payload = _envelope(args, polygon, "count-position", {"l": args.l}, complete)
    payload["series"] = series.to_dict()
    _emit(args, payload, series.to_csv() if args.format == "csv" else None)
    return EXIT_OK if complete else EXIT_BUDGET


def _cmd_count_direction(args):
    polygon = parse_polygon_file(args.polygon)
    try:
        series = direction_counting_map(
            polygon, args.theta, args.n, max_tiles=args.max_tiles
        )
        complete = True
    except BudgetExceededError as exc:
        series = CountingSeries(exc.partial.records, "steps", complete=False)
        complete = False
    payload = _envelope(args, polygon, "count-direction", {"n": args.n}, complete)
    payload["theta"] = args.theta
    payload["series"] = series.to_dict()
    _emit(args, payload, series.to_csv() if args.format == "csv" else None)
    return EXIT_OK if complete else EXIT_BUDGET


def _cmd_count_boundary(args):
    polygon = parse_polygon_file(args.polygon)
    pure, optical = position_counting_map(
        polygon, args.s, args.n, max_tiles=args.max_tiles
    )
    payload = _envelope(args, polygon, "count-boundary", {"n": args.n})
    payload["s"] = args.s
    payload["pure"] = pure.to_dict()
    payload["optical"] = optical.to_dict()
    _emit(args, payload, pure.to_csv() if args.format == "csv" else None)
    return EXIT_OK


def _cmd_complexity_position(args):
    polygon = parse_polygon_file(args.polygon)
    z = _parse_coords(args.z, polygon.model)
    series = position_complexity_flow(polygon, z, args.l, max_tiles=args.max_tiles)
    payload = _envelope(args, polygon, "complexity-position", {"l": args.l})
    payload["series"] = series.to_dict()
    _emit(args, payload)
    return EXIT_OK


def _cmd_complexity_direction(args):
    polygon = parse_polygon_file(args.polygon)
    series = direction_complexity_map(
        polygon, args.theta, args.n, max_tiles=args.max_tiles
    )
    payload = _envelope(args, polygon, "complexity-direction", {"n": args.n})
    payload["theta"] = args.theta
    payload["series"] = series.to_dict()
    _emit(args, payload)
    return EXIT_OK


def _cmd_bridge(args):
    polygon = parse_polygon_file(args.polygon)
    if args.theta is not None:
        g = direction_counting_map(polygon, args.theta, args.n, max_tiles=args.max_tiles)
        h = direction_complexity_map(polygon, args.theta, args.n, series=g)
        budget = {"n": args.n}
    else:
        z = _parse_coords(args.z, polygon.model)
        g = position_counting_flow(polygon, z, args.l, max_tiles=args.max_tiles)
        h = position_complexity_flow(polygon, z, args.l, series=g)
        budget = {"l": args.l}
    x0, const, stabilized = bridge_constants(h, g)
    payload = _envelope(args, polygon, "bridge", budget)
    payload["bridge"] = {
        "x0": x0,
        "constant": const,
        "stabilized": stabilized,
        "counting_events": len(g),
    }
    _emit(args, payload)
    return EXIT_OK


def _cmd_average(args):
    polygon = parse_polygon_file(args.polygon)
    if args.what == "direction":
        kind, arg, budget = Kind.DIRECTION_MAP, args.n, {"n": args.n}
    elif args.what == "position":
        kind, arg, budget = Kind.POSITION_FLOW, args.l, {"l": args.l}
    else:  # position-map
        comparison = mc_average_position_map(
            polygon,
            args.corner,
            args.n,
            args.samples,
            args.seed,
            max_tiles=args.max_tiles,
        )
        payload = _envelope(args, polygon, "average position-map", {"n": args.n})
        payload["comparison"] = {
            "corner": comparison.corner,
            "lhs_pure_mean": comparison.pure.mean,
            "lhs_pure_se": comparison.pure.standard_error,
            "lhs_optical_mean": comparison.optical.mean,
            "lhs_optical_se": comparison.optical.standard_error,
            "rhs_pure": comparison.rhs_pure,
            "rhs_optical": comparison.rhs_optical,
            "z_pure": comparison.pure.z_score(comparison.rhs_pure),
            "z_optical": comparison.optical.z_score(comparison.rhs_optical),
            "samples": args.samples,
            "exceptional": comparison.pure.exceptional_count,
        }
        _emit(args, payload)
        return EXIT_OK
    est = mc_average(
        polygon,
        kind,
        arg,
        args.samples,
        args.seed,
        workers=args.workers,
        max_tiles=args.max_tiles,
    )
    cf = closed_form_average(polygon, kind, arg)
    payload = _envelope(args, polygon, f"average {args.what}", budget)
    payload["estimate"] = {
        "mean": est.mean,
        "standard_error": est.standard_error,
        "samples": est.samples,
        "exceptional": est.exceptional_count,
        "suspicious": est.suspicious,
        "closed_form_normalized": cf.normalized,
        "closed_form_total": cf.total,
        "closed_form_printed_total": cf.printed_total,
        "z_score": est.z_score(cf.normalized),
    }
    _emit(args, payload)
    return EXIT_OK


def _cmd_tail_check(args):
    import numpy as np

    polygon = parse_polygon_file(args.polygon)
    rng = np.random.default_rng(args.seed)
    kappa = polygon.kappa()
    if args.family == "direction":
        ts = np.arange(1, args.budget + 1, dtype=float)
        avg = math.pi * kappa * ts
        curves = []
        for _ in range(args.samples):
            theta = rng.uniform(0.0, 2.0 * math.pi)
            try:
                series = direction_counting_map(
                    polygon, theta, args.budget, max_tiles=args.max_tiles
                )
            except ExceptionalDirectionError:
                continue
            curves.append([series.value(t) for t in ts])
    else:
        from .stats import sample_table_point

        ts = np.linspace(0.05, args.budget, 120)
        avg = math.pi * kappa * ts * ts / 2.0
        curves = []
        for _ in range(args.samples):
            z = sample_table_point(polygon, rng)
            try:
                series = position_counting_flow(
                    polygon, z, args.budget, max_tiles=args.max_tiles
                )
            except (ExceptionalBasepointError, InvalidBaseError):
                continue
            curves.append([series.value(t) for t in ts])
    result = ae_tail_check(ts, curves, avg, args.eps, args.T, C=args.C)
    payload = _envelope(
        args, polygon, f"tail-check {args.family}", {"budget": args.budget}
    )
    payload["tail_check"] = {
        "violation_fraction": result.violation_fraction,
        "n_samples": result.n_samples,
        "n_violations": result.n_violations,
        "lem1_fraction": result.lem1_fraction,
        "eps": args.eps,
        "T": args.T,
    }
    _emit(args, payload)
    return EXIT_OK


def _cmd_validate(args):
    polygon = parse_polygon_file(args.polygon)
    angle_sum, area, residual = angle_area_identity(polygon)
    payload = _envelope(args, polygon, "validate", None)
    payload["polygon"] = {
        "model": polygon.model.name.lower(),
        "corners": polygon.num_corners,
        "obstacles": polygon.num_obstacles,
        "kappa": polygon.kappa(),
        "area": area,
        "angle_sum": angle_sum,
        "identity_residual": residual,
        "perimeter": polygon.perimeter,
        "coxeter": [
            [None if math.isinf(x) else x for x in row]
            for row in coxeter_matrix(polygon)
        ],
        "rational_angle_max_denominator": 10**6,
    }
    _emit(args, payload)
    return EXIT_OK


def _cmd_verify(args):
    from . import acceptance

    if args.polygon:
        parse_polygon_file(args.polygon)  # validated, informational only
    results = acceptance.run_all(fast=args.fast)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------


def _add_common(sub, *, seed=False, samples=False):
    sub.add_argument("polygon", help="polygon spec file (JSON)")
    sub.add_argument("-o", "--output", default="-", help="output path (default stdout)")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument(
        "--max-tiles",
        type=int,
        default=int(os.environ.get("CCBILLIARDS_MAX_TILES", DEFAULT_MAX_TILES)),
        help="beam/tile cap",
    )
    if seed:
        sub.add_argument("--seed", type=int, required=True)
    if samples:
        sub.add_argument("--samples", type=int, required=True)


def build_parser():
    p = argparse.ArgumentParser(
        prog="ccbilliards",
        description="Polygonal billiards on constant-curvature surfaces: "
        "counting, complexity, and Monte Carlo verification experiments.",
    )
    p.add_argument("--version", action="version", version=__version__)
    subs = p.add_subparsers(dest="command", required=True)

    s = subs.add_parser("count-position", help="gc_z(l) from an interior point")
    _add_common(s)
    s.add_argument("--l", type=float, required=True)
    s.add_argument("--z", required=True, help="comma-separated coordinates")
    s.set_defaults(func=_cmd_count_position)

    s = subs.add_parser("count-direction", help="gd_theta(n), euclidean map")
    _add_common(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--theta", type=float, required=True, help="radians")
    s.set_defaults(func=_cmd_count_direction)

    s = subs.add_parser("count-boundary", help="gd_s(n), god_s(n) from a boundary point")
    _add_common(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--s", type=float, required=True, help="global arclength")
    s.set_defaults(func=_cmd_count_boundary)

    s = subs.add_parser("complexity-position", help="h_z(l) series")
    _add_common(s)
    s.add_argument("--l", type=float, required=True)
    s.add_argument("--z", required=True)
    s.set_defaults(func=_cmd_complexity_position)

    s = subs.add_parser("complexity-direction", help="fd_theta(n) series")
    _add_common(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--theta", type=float, required=True)
    s.set_defaults(func=_cmd_complexity_direction)

    s = subs.add_parser("bridge", help="stabilization of complexity minus counting")
    _add_common(s)
    s.add_argument("--l", type=float)
    s.add_argument("--z")
    s.add_argument("--n", type=int)
    s.add_argument("--theta", type=float)
    s.set_defaults(func=_cmd_bridge)

    s = subs.add_parser("average", help="Monte Carlo vs closed-form averages")
    s.add_argument("what", choices=("direction", "position", "position-map"))
    _add_common(s, seed=True, samples=True)
    s.add_argument("--l", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--corner", type=int, default=0)
    s.add_argument("--workers", type=int, default=int(os.environ.get("CCBILLIARDS_WORKERS", 1)))
    s.set_defaults(func=_cmd_average)

    s = subs.add_parser("tail-check", help="almost-everywhere tail-bound verifier")
    s.add_argument("family", choices=("direction", "position"))
    _add_common(s, seed=True, samples=True)
    s.add_argument("--budget", type=float, required=True, help="n or l range")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--C", type=float, default=None)
    s.set_defaults(func=_cmd_tail_check)

    s = subs.add_parser("validate", help="validate a polygon file and report invariants")
    _add_common(s)
    s.set_defaults(func=_cmd_validate)

    s = subs.add_parser("verify", help="run the full acceptance suite")
    s.add_argument("polygon", nargs="?", help="optional polygon file (validated only)")
    s.add_argument("--fast", action="store_true", help="reduced sample counts")
    s.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "bridge":
        if (args.theta is None) == (args.z is None):
            return _fail(EXIT_SCHEMA, "bridge needs exactly one of --z/--l or --theta/--n")
        if args.theta is not None and args.n is None:
            return _fail(EXIT_SCHEMA, "bridge --theta needs --n")
        if args.z is not None and args.l is None:
            return _fail(EXIT_SCHEMA, "bridge --z needs --l")
    if getattr(args, "command", None) == "average":
        if args.what == "direction" and args.n is None:
            return _fail(EXIT_SCHEMA, "average direction needs --n")
        if args.what == "position" and args.l is None:
            return _fail(EXIT_SCHEMA, "average position needs --l")
        if args.what == "position-map" and args.n is None:
            return _fail(EXIT_SCHEMA, "average position-map needs --n")
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_SCHEMA
    except BudgetExceededError as exc:
        return _fail(EXIT_BUDGET, str(exc))
    except (ExceptionalBasepointError, ExceptionalDirectionError) as exc:
        return _fail(EXIT_EXCEPTIONAL, str(exc))
    except InvalidBaseError as exc:
        return _fail(EXIT_INVALID_BASE, str(exc))
    except PolygonValidationError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except IntegrityError as exc:
        return _fail(EXIT_INTEGRITY, str(exc))
    except BilliardError as exc:
        return _fail(EXIT_INTEGRITY, str(exc))


if __name__ == "__main__":
    sys.exit(main())
