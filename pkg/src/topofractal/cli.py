"""Command-line front end.

Exit codes: 0 all checks pass, 1 a property fails, 2 usage error, 3 a
certificate search ran out of depth.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import ConstructionError, DomainError, UsageError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_EXHAUSTED = 0, 1, 2, 3


def _rational(text):
    from .spaces import parse_rational

    try:
        value = parse_rational(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive rational, got {text}")
    return value


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _nonneg_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topofractal", description="Certify topological fractals on exact model spaces."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", metavar="PATH", help="also write the JSON report here")
        p.add_argument(
            "--seedless",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="forbid randomness (default on; every command is deterministic)",
        )

    v = sub.add_parser("verify", help="covering check and contractivity certificates")
    v.add_argument("system", help="builtin:NAME or a JSON file")
    v.add_argument("--epsilon", type=_rational, action="append", help="repeatable; default 1/2")
    v.add_argument("--k-max", type=_positive_int, default=16)
    v.add_argument("--net", type=_rational, default=Fraction(1, 64), help="net resolution")
    v.add_argument("--method", choices=("regions", "net"), default="regions")
    common(v)

    a = sub.add_parser("attractor", help="iterate the Hutchinson operator")
    a.add_argument("system")
    a.add_argument("--iterations", type=_positive_int, default=10)
    a.add_argument("--points", type=_positive_int, default=4096, help="point budget")
    a.add_argument("--csv", metavar="PATH")
    a.add_argument("--svg", metavar="PATH")
    common(a)

    c = sub.add_parser("constraints", help="run a builtin system's self-verification")
    c.add_argument("system")
    c.add_argument("--depth", type=_nonneg_int, default=8, help="gap-word depth for table checks")
    common(c)

    o = sub.add_parser("orbit", help="orbit Q of a on the circle and its claims")
    o.add_argument("--depth", type=_nonneg_int, default=8)
    common(o)

    d = sub.add_parser("denjoy", help="blow-up, lifted maps and small preimages")
    d.add_argument("--depth", type=_nonneg_int, default=4)
    d.add_argument("--lambda-base", type=_rational, default=Fraction(1))
    d.add_argument("--epsilon", type=_rational, action="append")
    d.add_argument("--verify", action="store_true", help="also certify the lifted nine-map split")
    d.add_argument("--net", type=_positive_int, default=10_000, help="net size for the residual")
    common(d)
    return parser


def load_system(name: str):
    from .maps import system_from_json
    from .systems import builtin_system

    if name.startswith("builtin:"):
        return builtin_system(name)
    path = Path(name)
    if not path.exists():
        raise UsageError(f"no such system file: {name}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{name}: invalid JSON ({exc})") from None
    try:
        return system_from_json(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{name}: malformed system ({exc})") from None


def _emit(report: dict, args, out) -> None:
    text = json.dumps(report, sort_keys=True, indent=2)
    out.write(text + "\n")
    if getattr(args, "json", None):
        Path(args.json).write_text(text + "\n")


def cmd_verify(args, out):
    from .contractivity import verify_topological_fractal

    system = load_system(args.system)
    net = system.net(args.net)
    eps = args.epsilon or [Fraction(1, 2)]
    report = verify_topological_fractal(system, eps, args.k_max, net, "net" if args.method == "net" else None)
    _emit({"system": args.system, **report.to_json()}, args, out)
    if not report.covering.ok:
        return EXIT_VIOLATION
    if any(c.k is None for c in report.certificates):
        return EXIT_EXHAUSTED
    return EXIT_OK


def cmd_attractor(args, out, err):
    from .attractor import contraction_ratio, iterate_to_attractor, invariance_residual, to_csv, to_svg
    from .spaces import Cube

    system = load_system(args.system)
    space = system.space
    if isinstance(space, Cube):
        seed = [tuple(Fraction(0) for _ in range(space.dim))]
    else:
        seed = [space.lo if hasattr(space, "lo") else Fraction(0)]
    ratio = contraction_ratio(system)
    if ratio is None:
        err.write(
            "warning: not a metric contraction; iterates still converge by compactness "
            "but no rate is reported\n"
        )
    pts, run = iterate_to_attractor(system, seed, args.iterations, args.points)
    report = {
        "system": args.system,
        "points": len(pts),
        "contraction_ratio": None if ratio is None else str(ratio),
        "residual": str(invariance_residual(system, pts)),
        **run.to_json(),
    }
    if args.csv:
        Path(args.csv).write_text(to_csv(space, pts))
    if args.svg:
        Path(args.svg).write_text(to_svg(space, pts))
    _emit(report, args, out)
    return EXIT_OK


def cmd_constraints(args, out):
    from .spaces import StructuredInterval
    from .systems import (
        build_cube_system,
        circle_maps,
        structured_f,
        structured_g,
        verify_circle_constraints,
        verify_structured_tables,
    )

    key = args.system.removeprefix("builtin:")
    if key == "cantor-interval":
        sp = StructuredInterval()
        rep = verify_structured_tables(structured_f(sp), structured_g(sp), args.depth)
    elif key == "circle23":
        rep = verify_circle_constraints(*circle_maps())
    elif key.startswith("cube-"):
        try:
            n = int(key[5:])
        except ValueError:
            raise UsageError(f"bad cube dimension in {args.system!r}") from None
        rep = build_cube_system(n).checks
    else:
        raise UsageError(
            f"no constraint suite for {args.system!r}; use builtin:cantor-interval, builtin:circle23 or builtin:cube-N"
        )
    _emit({"system": args.system, **rep.to_json()}, args, out)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_orbit(args, out):
    from .systems import build_circle_system, check_circle_claims, orbit_Q

    circle = build_circle_system()
    Q = orbit_Q(args.depth, circle)
    rep = check_circle_claims(Q, circle)
    _emit({"orbit": Q.to_json(), "claims": rep.to_json()}, args, out)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_denjoy(args, out):
    from .contractivity import fractalmaps_certificate
    from .denjoy import build_blowup, denjoy_report, lift_maps

    eps = args.epsilon or []
    report, ok = denjoy_report(args.depth, args.lambda_base, eps, args.net)
    code = EXIT_OK if ok else EXIT_VIOLATION
    if args.verify:
        lifted = lift_maps(build_blowup(args.depth, args.lambda_base))
        nine = lifted.nine()
        certs = []
        for e in eps or [Fraction(1)]:
            r = fractalmaps_certificate(nine.maps[:6], nine.maps[6:], 3, e, 40)
            certs.append({"epsilon": str(e), **r.to_json()})
            if not r.ok and code == EXIT_OK:
                code = EXIT_EXHAUSTED if r.violation is None else EXIT_VIOLATION
        report["nine_map_certificates"] = certs
    _emit(report, args, out)
    return code


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return cmd_verify(args, out)
        if args.command == "attractor":
            return cmd_attractor(args, out, err)
        if args.command == "constraints":
            return cmd_constraints(args, out)
        if args.command == "orbit":
            return cmd_orbit(args, out)
        return cmd_denjoy(args, out)
    except (UsageError, DomainError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ConstructionError as exc:
        err.write(f"construction failed: {exc}\n")
        return EXIT_VIOLATION


if __name__ == "__main__":
    raise SystemExit(main())
