"""Command-line pipeline: coords, deform, coons, elevate, validate, tessellate.

Errors are reported on stderr as ``error[<category>]: <message>`` and the
process exits with status 2 (bad usage) or 1 (everything else).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import io
from .cage import Cage, elevate_quad_cage, tessellate_cage, validate_cage
from .coons import fill_interior
from .coordinates import cage_coordinates, reconstruct
from .deformation import DEFAULT_SIGMA_RES, apply_deformation, cage_sigma, check_structure
from .errors import BezcageError, CageError, ExteriorPointError
from .integration import DEFAULT_GRID, DEFAULT_LEVELS
from .projection import constraint_matrix, project_table

logger = logging.getLogger("bezcage")


def _project(table, cage, vertices):
    if table.projected:
        return table
    return project_table(constraint_matrix(cage, variant=table.variant), table, vertices)


def cmd_coords(args):
    cage = io.load_cage(args.cage)
    mesh = io.read_mesh(args.mesh)
    t0 = time.perf_counter()
    try:
        table = cage_coordinates(cage, mesh, args.grid, args.levels, args.variant)
    except ExteriorPointError as exc:
        obj = ", ".join(str(i + 1) for i in exc.indices[:20])
        raise ExteriorPointError(f"{exc} (OBJ vertex numbers {obj})", exc.indices) from None
    if args.project:
        table = _project(table, cage, mesh.vertices)
    io.save_coordinates(args.out, table, cage, mesh.vertices)
    logger.info("%d vertices in %.2fs -> %s", len(table), time.perf_counter() - t0, args.out)


def cmd_deform(args):
    source = io.load_cage(args.cage)
    target = io.load_cage(args.target)
    mesh = io.read_mesh(args.mesh)
    table = io.load_coordinates(args.coords, source, mesh.vertices)
    check_structure(source, target)
    table = _project(table, source, mesh.vertices)
    sigma = cage_sigma(source, target, args.sigma_res) if table.variant == "normals" else None
    out = apply_deformation(table, target, sigma)
    io.write_mesh(args.out, mesh.with_vertices(out))


def cmd_coons(args):
    m, n = args.degree
    with open(args.loops) as fh:
        loops = io.parse_loops(fh.read())
    cage = Cage(tuple(fill_interior(loop, m, n) for loop in loops))
    report = validate_cage(cage)
    if not report.passed:
        logger.warning("filled patches do not form a valid closed cage: %s", report.summary())
    io.save_cage(args.out, cage)


def cmd_elevate(args):
    quads = io.read_quads(args.quads)
    cage = elevate_quad_cage(quads, args.degree)
    report = validate_cage(cage)
    if not report.passed:
        logger.warning("elevated cage is not valid: %s", report.summary())
    io.save_cage(args.out, cage)


def cmd_validate(args):
    cage = io.load_cage(args.cage, validate=False)
    report = validate_cage(cage)
    print(f"cage: {report.summary()} (signed volume {report.signed_volume:.6g})")
    if not report.passed:
        raise CageError(report.summary())
    system = constraint_matrix(cage)
    print(f"rank(A) = {system.rank}, cond(A A^T) = {system.condition:.3e}")
    if args.mesh is None:
        return
    mesh = io.read_mesh(args.mesh)
    if args.coords:
        table = io.load_coordinates(args.coords, cage, mesh.vertices)
    else:
        table = cage_coordinates(cage, mesh, args.grid, args.levels)
    rows = [("raw", table)] if not table.projected else []
    rows.append(("projected", _project(table, cage, mesh.vertices)))
    diam = cage.diameter
    for label, tab in rows:
        err = np.linalg.norm(reconstruct(tab, cage) - mesh.vertices, axis=1)
        pou = np.abs(tab.phi.sum(axis=1) - 1.0)
        print(
            f"{label:>9}: reproduction max {err.max():.3e} mean {err.mean():.3e} "
            f"({err.max() / diam:.3e} of diameter), partition of unity max {pou.max():.3e}"
        )


def cmd_tessellate(args):
    cage = io.load_cage(args.cage, validate=False)
    mesh = tessellate_cage(cage, args.res)
    io.write_mesh(args.out, mesh)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bezcage", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    # -v is accepted after the subcommand as well
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("coords", parents=[common], help="precompute coordinates of a mesh in a cage")
    p.add_argument("--cage", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--levels", type=int, default=DEFAULT_LEVELS)
    p.add_argument("--variant", choices=("normals", "crossprod"), default="normals")
    p.add_argument("--project", action=argparse.BooleanOptionalAction, default=False)
    p.set_defaults(func=cmd_coords)

    p = sub.add_parser("deform", parents=[common], help="deform a mesh with a target cage")
    p.add_argument("--coords", required=True)
    p.add_argument("--cage", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma-res", type=int, default=DEFAULT_SIGMA_RES)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("coons", parents=[common], help="fill patch interiors from boundary loops")
    p.add_argument("--loops", required=True)
    p.add_argument("--degree", type=int, nargs=2, metavar=("M", "N"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coons)

    p = sub.add_parser("elevate", parents=[common], help="turn a quad OBJ into a degree-d tensor cage")
    p.add_argument("--quads", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_elevate)

    p = sub.add_parser("validate", parents=[common], help="check a cage and report reproduction errors")
    p.add_argument("--cage", required=True)
    p.add_argument("--mesh")
    p.add_argument("--coords")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--levels", type=int, default=DEFAULT_LEVELS)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tessellate", parents=[common], help="export the cage surface as an OBJ")
    p.add_argument("--cage", required=True)
    p.add_argument("--res", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tessellate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "validate" and args.coords and not args.mesh:
        parser.error("--coords needs --mesh")
    try:
        args.func(args)
    except BezcageError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error[value]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
