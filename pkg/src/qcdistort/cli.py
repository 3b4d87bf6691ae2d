"""Command-line interface: analyze, param, theory, version subcommands.

Exit codes: 0 success (including fold warnings), 1 failed theory check or
solver failure, 2 I/O or parse error, 3 validation/topology error.  All
stored values are radians; ``--degrees`` converts displayed summary lines
only, never the JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .beltrami import MeshMap
from .errors import (
    DegenerateFaceError,
    NonManifoldEdgeError,
    ParseError,
    SolverError,
    TopologyError,
    ValidationError,
)
from .mesh import load_mesh, save_mesh
from .parameterize import ParamConfig, tutte_disk
from .report import (
    DEFAULT_BINS,
    FIELD_NAMES,
    export_colored_mesh,
    export_report,
    report_json,
    summarize,
)
from .theory import (
    MIN_GRID,
    TheoryCheck,
    brute_force_max_distortion,
    max_distortion_for_angle,
    max_half_angle_deviation,
    run_all_checks,
)

_ANGLE_FIELDS = ("eps_angle_t", "eps_mu_t")


def _add_global_flags(parser: argparse.ArgumentParser, top_level: bool) -> None:
    # defined on the root parser and again on every subparser (with SUPPRESS
    # defaults) so they are accepted on either side of the subcommand
    parser.add_argument(
        "--threads", type=int, metavar="N",
        default=1 if top_level else argparse.SUPPRESS,
        help="cap on worker threads for per-face computations",
    )
    parser.add_argument(
        "--quiet", action="store_true",
        default=False if top_level else argparse.SUPPRESS,
        help="suppress summary output on stdout",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcdistort",
        description="Beltrami-coefficient and angular-distortion analysis "
        "of triangle mesh maps.",
    )
    _add_global_flags(parser, top_level=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="distortion report for a source/target mesh pair")
    p_an.add_argument("source", help="source mesh (OBJ or OFF)")
    p_an.add_argument("target", help="target mesh with identical connectivity")
    p_an.add_argument("--out", default="report.json", metavar="PATH",
                      help="JSON report path (default: report.json)")
    p_an.add_argument("--csv", metavar="PATH", help="also write a per-face CSV")
    p_an.add_argument("--ply-out", metavar="PATH",
                      help="write the target mesh as color-coded PLY")
    p_an.add_argument("--field", choices=FIELD_NAMES, default="abs_mu",
                      help="field for --ply-out coloring (default: abs_mu)")
    p_an.add_argument("--bins", type=int, default=DEFAULT_BINS,
                      help=f"histogram bin count (default: {DEFAULT_BINS})")
    p_an.add_argument("--json", action="store_true",
                      help="print the full JSON report to stdout instead of "
                           "writing the default file")
    p_an.add_argument("--degrees", action="store_true",
                      help="display angle summaries in degrees (JSON stays radians)")

    p_pa = sub.add_parser("param", help="Tutte disk embedding of a disk-topology mesh")
    p_pa.add_argument("source", help="disk-topology mesh (OBJ or OFF)")
    p_pa.add_argument("-o", "--output", metavar="PATH",
                      help="flattened OBJ path (default: <source stem>_flat.obj)")
    p_pa.add_argument("--weights", choices=("uniform", "cotangent"), default="uniform")
    p_pa.add_argument("--analyze", action="store_true",
                      help="also analyze source -> flat and write "
                           "<output>.report.json")

    p_th = sub.add_parser("theory", help="run the formula-vs-oracle verification suite")
    p_th.add_argument("--seed", type=int, default=42, help="seed for the random-model suite")
    p_th.add_argument("--grid", type=int, default=100_000,
                      help="orientation grid size for the sweep oracle")
    p_th.add_argument("--k", type=float, default=None, metavar="K",
                      help="single-case mode: dilatation to check")
    p_th.add_argument("--theta", type=float, default=None, metavar="T",
                      help="single-case mode: wedge angle in radians (with --k)")
    p_th.add_argument("--json", action="store_true", help="emit the table as JSON")

    p_ve = sub.add_parser("version", help="print the tool version")
    for p in (p_an, p_pa, p_th, p_ve):
        _add_global_flags(p, top_level=False)
    return parser


def _display_angle(value: float, degrees: bool) -> str:
    if degrees:
        return f"{math.degrees(value):.6f} deg"
    return f"{value:.6f} rad"


def _print_summary(report, quiet: bool, degrees: bool = False) -> None:
    if quiet:
        return
    print(f"faces: {report.face_count}   folded: {report.folded_count}   "
          f"bound violations: {report.bound_violations}")
    for name in FIELD_NAMES:
        s = report.stats[name]
        if s is None:
            print(f"  {name:<12} (no non-folded faces)")
            continue
        if name in _ANGLE_FIELDS:
            mean = _display_angle(s.mean, degrees)
            peak = _display_angle(s.max, degrees)
        else:
            mean, peak = f"{s.mean:.6f}", f"{s.max:.6f}"
        print(f"  {name:<12} mean {mean}   max {peak}")


def run_analyze(args) -> int:
    try:
        src = load_mesh(args.source)
        dst = load_mesh(args.target)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    try:
        mapping = MeshMap(src, dst)
        rep = summarize(
            mapping,
            bins=args.bins,
            source_path=args.source,
            target_path=args.target,
            workers=args.threads,
        )
    except (ValidationError, DegenerateFaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    try:
        if args.json:
            sys.stdout.write(report_json(rep))
        else:
            export_report(rep, args.out, "json")
            _print_summary(rep, args.quiet, args.degrees)
            if not args.quiet:
                print(f"report written to {args.out}")
        if args.csv:
            export_report(rep, args.csv, "csv")
        if args.ply_out:
            export_colored_mesh(
                mapping, args.field, args.ply_out,
                beltrami=rep.beltrami, angular=rep.angular,
            )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if rep.folded_count:
        print(f"warning: {rep.folded_count} folded faces "
              f"(excluded from statistics)", file=sys.stderr)
    return 0


def run_param(args) -> int:
    try:
        mesh = load_mesh(args.source)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    try:
        mapping = tutte_disk(mesh, ParamConfig(weights=args.weights))
    except (TopologyError, NonManifoldEdgeError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = args.output
    if out is None:
        stem = args.source.rsplit(".", 1)[0]
        out = f"{stem}_flat.obj"
    try:
        save_mesh(mapping.target, out, "obj")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"flattened mesh written to {out}")
    if args.analyze:
        rep = summarize(
            mapping,
            source_path=args.source,
            target_path=out,
            workers=args.threads,
        )
        report_path = f"{out}.report.json"
        try:
            export_report(rep, report_path, "json")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        _print_summary(rep, args.quiet)
        if not args.quiet:
            print(f"report written to {report_path}")
        if rep.folded_count:
            print(f"warning: {rep.folded_count} folded faces", file=sys.stderr)
    return 0


def _single_case_checks(args, grid: int) -> list[TheoryCheck]:
    k = args.k
    if args.theta is not None:
        formula, _ = max_distortion_for_angle(args.theta, k)
        grid_val, _ = brute_force_max_distortion(args.theta, k, grid)
        diff = abs(formula - grid_val)
        print(f"max distortion of theta={args.theta:.6g} at K={k:g}:")
        print(f"  formula: {formula:.9f} rad")
        print(f"  grid:    {grid_val:.9f} rad   (grid size {grid})")
        print(f"  |difference| = {diff:.3e}")
        return [TheoryCheck(
            name=f"single case K={k:g} theta={args.theta:.6g}",
            passed=diff <= 1e-5, observed=diff, tolerance=1e-5,
            params={"dilatation": k, "theta": args.theta, "grid_size": grid},
        )]
    formula, theta_star = max_half_angle_deviation(k)
    samples = max(10 * grid, 1_000_000)
    thetas = np.linspace(1e-6, math.pi / 2 - 1e-6, samples)
    grid_val = float((thetas - np.arctan(np.tan(thetas) / k)).max())
    diff = abs(formula - grid_val)
    print(f"max half-angle deviation at K={k:g}:")
    print(f"  formula: {formula:.9f} rad (at half-angle {theta_star:.9f})")
    print(f"  grid:    {grid_val:.9f} rad")
    print(f"  |difference| = {diff:.3e}")
    return [TheoryCheck(
        name=f"single case K={k:g} deviation",
        passed=diff <= 1e-6, observed=diff, tolerance=1e-6,
        params={"dilatation": k, "grid_size": grid},
    )]


def run_theory(args) -> int:
    grid = args.grid
    if grid < MIN_GRID:
        print(f"warning: grid {grid} below minimum, clamping to {MIN_GRID}",
              file=sys.stderr)
        grid = MIN_GRID
    if args.theta is not None and args.k is None:
        print("error: --theta requires --k", file=sys.stderr)
        return 2
    if args.k is not None:
        checks = _single_case_checks(args, grid)
    else:
        checks = run_all_checks(seed=args.seed, grid_size=grid)
    if args.json:
        sys.stdout.write(json.dumps([c.as_dict() for c in checks], indent=2) + "\n")
    elif not args.quiet:
        width = max(len(c.name) for c in checks)
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{c.name:<{width}}  {status}  observed {c.observed:.3e} "
                  f"(tol {c.tolerance:.0e})")
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(f"FAILED: {c.name}: observed {c.observed:.6e} > tol "
              f"{c.tolerance:.0e}; params {c.params}", file=sys.stderr)
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING)
    if args.command == "analyze":
        return run_analyze(args)
    if args.command == "param":
        return run_param(args)
    if args.command == "theory":
        return run_theory(args)
    print(f"qcdistort {__version__}")
    return 0


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
