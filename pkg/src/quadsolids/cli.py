"""Command-line interface.

Subcommands: `volume` (measure a .solid file by Monte Carlo or octree),
`revenge` (the tri-hyperboloid decomposition with all cross-checks),
`classics` (bicylinder / tricylinder regression targets) and `mesh`
(OBJ wireframe export).  Reports are printed to stdout as JSON with
17-significant-digit numbers; diagnostics go to stderr.

Exit codes: 0 success, 1 failed checks, 2 parse error, 3 unbounded solid
without a user bounding box, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import classics, cubature, mesh_export, montecarlo, trihyperboloid
from .dsl import ParseError, parse_solid
from .quadric import Box, ImplicitSolid

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_UNBOUNDED = 3
EXIT_IO_ERROR = 4


# --------------------------------------------------------------------------
# JSON with fixed 17-significant-digit floats
# --------------------------------------------------------------------------


def dump_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{pad}  "{k}": {dump_json(v, indent + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}  {dump_json(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, bool) or value is None:
        return "true" if value is True else "false" if value is False else "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isfinite(v):
            return f"{v:.17g}"
        return '"inf"' if v > 0 else '"-inf"' if v < 0 else '"nan"'
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize {type(value)!r}")


def _result(name: str, value: float, err, method: str) -> dict:
    return {
        "name": name,
        "value": float(value),
        "error_bound_or_stderr": None if err is None else float(err),
        "method": method,
    }


def _check(name: str, lhs: float, rhs: float, tolerance: float) -> dict:
    return {
        "name": name,
        "pass": abs(lhs - rhs) <= tolerance,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "tolerance": float(tolerance),
    }


def _emit(report: dict, started: float) -> None:
    report["wall_time_ms"] = int(round((time.perf_counter() - started) * 1000))
    print(dump_json(report))


def _report_exit(report: dict) -> int:
    return EXIT_OK if all(c["pass"] for c in report["checks"]) else EXIT_CHECKS_FAILED


# --------------------------------------------------------------------------
# thread plumbing
# --------------------------------------------------------------------------


def _resolve_threads(value) -> int:
    if value is None:
        value = os.environ.get("QS_THREADS")
    if value is None:
        return os.cpu_count() or 1
    n = int(value)
    if n < 1:
        raise ValueError("--threads must be >= 1")
    return n


def _apply_numba_threads(n: int) -> None:
    import numba

    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _parse_bbox(text: str) -> Box:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 6:
        raise ValueError("--bbox wants lo,hi,lo,hi,lo,hi")
    return Box(parts[0::2], parts[1::2])


def _load_solid(path: str) -> ImplicitSolid:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_solid(fh.read())


def cmd_volume(args, started: float) -> int:
    try:
        solid = _load_solid(args.file)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    box = _parse_bbox(args.bbox) if args.bbox else (solid.bbox or solid.certified_bbox())
    if box is None:
        print(
            "error: solid could not be certified as bounded; pass --bbox lo,hi,lo,hi,lo,hi",
            file=sys.stderr,
        )
        return EXIT_UNBOUNDED

    threads = _resolve_threads(args.threads)
    report = {
        "command": "volume",
        "inputs": {
            "file": args.file,
            "method": args.method,
            "n": args.n,
            "seed": args.seed,
            "tol": args.tol,
            "bbox": [float(v) for pair in zip(box.lo, box.hi) for v in pair],
            "threads": threads,
        },
        "results": [],
        "checks": [],
    }
    if args.method == "mc":
        est = montecarlo.estimate(solid, box, args.n, args.seed, threads=threads)
        report["results"].append(_result("volume", est.value, est.stderr, "mc"))
        report["inputs"]["hits"] = est.hits
    else:
        _apply_numba_threads(threads)
        res = cubature.volume_by_octree(solid, box, args.tol)
        report["results"].append(_result("volume", res.value, res.abs_error_bound, "octree"))
        report["checks"].append(_check("octree_converged", float(res.converged), 1.0, 0.0))
    _emit(report, started)
    return _report_exit(report)


def cmd_revenge(args, started: float) -> int:
    threads = _resolve_threads(args.threads)
    _apply_numba_threads(threads)
    rep = trihyperboloid.full_report(
        args.tol,
        mc_samples=args.mc_n,
        mc_seed=args.seed,
        octree_tol=args.octree_tol,
        threads=threads,
    )
    results = [
        _result("vol_pi1", rep.vol_pi1, None, "closed_form"),
        _result("vol_pi2", rep.vol_pi2, None, "closed_form"),
        _result("I", rep.I, None, "closed_form"),
        _result("I1", rep.I1, None, "closed_form"),
        _result("I2", rep.I2, None, "closed_form"),
        _result("V1", rep.V1, None, "closed_form"),
        _result("total", rep.total, None, "closed_form"),
        _result("I_quadrature", rep.quadrature_I.value, rep.quadrature_I.abs_error_bound, "cubature"),
        _result("li_integral", rep.li.value, rep.li.abs_error_bound, "cubature"),
    ]
    checks = [
        _check("total_eq_8log2", rep.total, trihyperboloid.LOG256, 1e-12),
        _check("V1_eq_log2", rep.V1, math.log(2.0), 1e-12),
        _check("I_quadrature_vs_closed", rep.quadrature_I.value, rep.I,
               max(rep.quadrature_I.abs_error_bound, 1e-15)),
        _check("li_equals_I", rep.li.value, rep.I, 1e-9),
    ]
    if rep.mc is not None:
        results.append(_result("total_mc", rep.mc.value, rep.mc.stderr, "mc"))
        checks.append(_check("mc_4sigma", rep.mc.value, rep.total, 4.0 * rep.mc.stderr))
    if rep.octree is not None:
        results.append(_result("total_octree", rep.octree.value, rep.octree.abs_error_bound, "octree"))
        checks.append(_check("octree_vs_closed", rep.octree.value, rep.total,
                             rep.octree.abs_error_bound))
    report = {
        "command": "revenge",
        "inputs": {
            "tol": args.tol,
            "mc_n": args.mc_n,
            "seed": args.seed,
            "octree_tol": args.octree_tol,
            "threads": threads,
        },
        "results": results,
        "checks": checks,
    }
    _emit(report, started)
    return _report_exit(report)


def cmd_classics(args, started: float) -> int:
    threads = _resolve_threads(args.threads)
    _apply_numba_threads(threads)
    results = []
    checks = []
    inputs = {
        "shape": args.shape,
        "radius": args.radius,
        "angle": args.angle,
        "method": args.method,
        "n": args.n,
        "seed": args.seed,
        "tol": args.tol,
        "threads": threads,
    }
    r = args.radius
    if args.shape == "bicylinder":
        angle = math.radians(args.angle if args.angle is not None else 90.0)
        try:
            solid = classics.bicylinder(r, angle)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE_ERROR
        box_volume = 8.0 * r**3 / math.sin(angle)
        orthogonal = abs(angle - math.pi / 2.0) <= 1e-12
        if orthogonal and args.method != "mc":
            res = cubature.volume_by_octree(solid, solid.bbox, args.tol)
            ratio = res.value / box_volume
            results.append(_result("volume", res.value, res.abs_error_bound, "octree"))
            results.append(_result("box_ratio", ratio, res.abs_error_bound / box_volume, "octree"))
            checks.append(_check("ratio_two_thirds", ratio, 2.0 / 3.0, 2e-3))
        else:
            shear = classics.bicylinder_box_map(angle)
            ortho = classics.bicylinder(r, math.pi / 2.0)
            cube = Box.cube(r)
            _, ratio = classics.affine_ratio_check(ortho, cube, shear, args.n, args.seed,
                                                   threads=threads)
            stderr = math.sqrt(max(ratio * (1.0 - ratio), 1e-12) / args.n)
            results.append(_result("volume", ratio * box_volume, stderr * box_volume, "mc"))
            results.append(_result("box_ratio", ratio, stderr, "mc"))
            checks.append(_check("ratio_two_thirds", ratio, 2.0 / 3.0, 5e-3))
    else:
        solid = classics.tricylinder(r)
        oct_res = cubature.volume_by_octree(solid, solid.bbox, args.tol)
        mc_res = montecarlo.estimate(solid, solid.bbox, args.n, args.seed, threads=threads)
        results.append(_result("volume_octree", oct_res.value, oct_res.abs_error_bound, "octree"))
        results.append(_result("volume_mc", mc_res.value, mc_res.stderr, "mc"))
        checks.append(
            _check("mc_octree_agree", mc_res.value, oct_res.value,
                   oct_res.abs_error_bound + 4.0 * mc_res.stderr)
        )
    report = {
        "command": "classics",
        "inputs": inputs,
        "results": results,
        "checks": checks,
    }
    _emit(report, started)
    return _report_exit(report)


def cmd_mesh(args, started: float) -> int:
    mesh = mesh_export.build_wireframe(args.rulings)
    if args.patches:
        resolution = max(args.rulings + 1, 2)
        for piece in ("S1", "S2", "S3"):
            patch = mesh_export.triangulate_patch(piece, resolution)
            verts = patch.vertex_array()
            for g in mesh_export.SYMMETRY_GROUP[:8]:  # sign flips cover all octants
                mapped = verts @ g.T
                for i, j, k in patch.faces:
                    mesh.add_face(mapped[i], mapped[j], mapped[k])
    text = mesh_export.write_obj(mesh)
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    report = {
        "command": "mesh",
        "inputs": {"out": args.out, "rulings": args.rulings, "patches": bool(args.patches)},
        "results": [
            _result("vertices", len(mesh.vertices), None, "mesh"),
            _result("segments", len(mesh.segments), None, "mesh"),
            _result("faces", len(mesh.faces), None, "mesh"),
        ],
        "checks": [],
    }
    _emit(report, started)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadsolids",
        description="Volumes of solids bounded by quadric surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_threads(p):
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: QS_THREADS or all cores); never changes results")

    v = sub.add_parser("volume", help="measure a .solid file")
    v.add_argument("--file", required=True, help="path to a .solid constraint file")
    v.add_argument("--method", choices=("mc", "octree"), required=True)
    v.add_argument("--n", type=int, default=1_000_000, help="Monte Carlo samples")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=5e-3, help="octree volume tolerance")
    v.add_argument("--bbox", default=None, help="lo,hi,lo,hi,lo,hi enclosure override")
    add_threads(v)
    v.set_defaults(run=cmd_volume)

    rv = sub.add_parser("revenge", help="tri-hyperboloid decomposition and cross-checks")
    rv.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
    rv.add_argument("--mc-n", type=int, default=4_000_000, dest="mc_n",
                    help="Monte Carlo cross-check samples (0 disables)")
    rv.add_argument("--seed", type=int, default=42)
    rv.add_argument("--octree-tol", type=float, default=2e-3, dest="octree_tol",
                    help="octree cross-check tolerance (pass 0 to disable)")
    add_threads(rv)
    rv.set_defaults(run=cmd_revenge)

    c = sub.add_parser("classics", help="bicylinder / tricylinder targets")
    c.add_argument("--shape", choices=("bicylinder", "tricylinder"), required=True)
    c.add_argument("--radius", type=float, default=1.0)
    c.add_argument("--angle", type=float, default=None, help="bicylinder axis angle in degrees")
    c.add_argument("--method", choices=("auto", "mc", "octree"), default="auto")
    c.add_argument("--n", type=int, default=4_000_000)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--tol", type=float, default=8e-3, help="octree volume tolerance")
    add_threads(c)
    c.set_defaults(run=cmd_classics)

    m = sub.add_parser("mesh", help="export an OBJ wireframe of the tri-hyperboloid")
    m.add_argument("--out", required=True, help="output .obj path")
    m.add_argument("--rulings", type=int, default=17, help="rulings per family per piece")
    m.add_argument("--patches", action="store_true", help="add triangulated surface patches")
    add_threads(m)
    m.set_defaults(run=cmd_mesh)
    return parser


def main(argv=None) -> int:
    started = time.perf_counter()
    args = _build_parser().parse_args(argv)
    if getattr(args, "octree_tol", None) == 0:
        args.octree_tol = None
    try:
        return args.run(args, started)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
