"""The tri-hyperboloid solid and its exact volume decomposition.

The solid is the intersection of the three unit one-sheeted hyperboloids

    x^2 + y^2 - z^2 <= 1,   y^2 + z^2 - x^2 <= 1,   z^2 + x^2 - y^2 <= 1.

Its volume is log 256 = 8 log 2.  The first-octant component splits into two
tetrahedra with a common equilateral base plus three congruent curved pieces
bounded by hyperboloid patches; one curved piece has volume

    I = integral over 0 <= y <= x <= 1 of sqrt(1 + y^2 - x^2) - (1 - x + y)
      = log(2)/3 - 1/6,

so the octant volume is 3*I + 1/6 + 1/3 = log 2.  This module carries the
straight-edge data (the pairwise surface intersections clip to the edges of a
stella octangula), the ruling parametrization of the curved pieces, the closed
forms, and their quadrature cross-checks.

Note on the rulings: the hyperboloid z^2 + x^2 - y^2 = 1 is doubly ruled, and
the line through (sin t0, 0, cos t0) stays on the surface only if the second
coordinate grows with the parameter; the map used here is
t -> (sin t0 + t cos t0, t, cos t0 - t sin t0), which has residual zero and
ends on the plane x - y + z = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import cubature, montecarlo
from .cubature import QuadratureResult
from .montecarlo import VolumeEstimate
from .quadric import Box, ImplicitSolid, QuadricForm

__all__ = [
    "solid",
    "first_octant_solid",
    "Line",
    "LinePair",
    "RulingSegment",
    "CrossCheck",
    "DecompositionReport",
    "pairwise_intersection",
    "stella_segments",
    "tetra_volume",
    "curved_piece_closed_form",
    "curved_piece_quadrature",
    "curved_piece_parts_quadrature",
    "curved_piece_contains",
    "li_integral",
    "ruling_angles",
    "ruling_point",
    "ruling_span",
    "rulings",
    "full_report",
    "LOG256",
]

LOG256 = 8.0 * math.log(2.0)

# sign patterns of (x^2, y^2, z^2) in the three constraints
_SIGNS = ((1.0, 1.0, -1.0), (-1.0, 1.0, 1.0), (1.0, -1.0, 1.0))


def _constraint_form(i: int) -> QuadricForm:
    sx, sy, sz = _SIGNS[i]
    return QuadricForm.from_coeffs([sx, sy, sz, 0, 0, 0, 0, 0, 0, -1.0])


def solid() -> ImplicitSolid:
    """The full tri-hyperboloid, bounding box [-1, 1]^3."""
    return ImplicitSolid.from_forms(
        [_constraint_form(i) for i in range(3)], bbox=Box.cube(1.0)
    )


def first_octant_solid() -> ImplicitSolid:
    """The component in the first octant (adds x, y, z >= 0); box [0, 1]^3."""
    forms = [_constraint_form(i) for i in range(3)]
    for axis in range(3):
        co = [0.0] * 10
        co[6 + axis] = -1.0
        forms.append(QuadricForm.from_coeffs(co))
    return ImplicitSolid.from_forms(forms, bbox=Box((0, 0, 0), (1, 1, 1)))


# ---------------------------------------------------------------------------
# straight boundary segments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Line:
    point: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class LinePair:
    """The two intersection lines of a hyperboloid pair in their common
    plane {axis = +1}, each clipped to a segment by the remaining constraint.

    The companion pair in the plane {axis = -1} is the image under central
    reflection p -> -p.
    """

    lines: tuple[Line, Line]
    clip_segments: tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    plane_axis: int


def pairwise_intersection(i: int, j: int) -> LinePair:
    """Intersection of hyperboloid surfaces i and j of the tri-hyperboloid.

    Adding the two surface equations pins the coordinate whose square enters
    both with +1; subtracting them forces the squares of the other two
    coordinates to agree, so the intersection degenerates to lines.
    """
    if i == j:
        raise ValueError("need two distinct constraint indices")
    if not {i, j} <= {0, 1, 2}:
        raise ValueError("constraint indices must be in {0, 1, 2}")
    pair = {i, j}
    axis = next(
        k for k in range(3) if _SIGNS[min(pair)][k] > 0 and _SIGNS[max(pair)][k] > 0
    )
    u, v = (k for k in range(3) if k != axis)
    point = np.zeros(3)
    point[axis] = 1.0
    lines = []
    segments = []
    for sv in (1.0, -1.0):
        direction = np.zeros(3)
        direction[u] = 1.0
        direction[v] = sv
        lines.append(Line(point, direction))
        # third constraint restricts the line parameter to [-1, 1]
        segments.append((point - direction, point + direction))
    return LinePair(tuple(lines), tuple(segments), axis)


def stella_segments() -> list[tuple[np.ndarray, np.ndarray]]:
    """All 12 clipped intersection segments (4 per hyperboloid pair)."""
    out = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for a, b in pairwise_intersection(i, j).clip_segments:
            out.append((a, b))
            out.append((-a, -b))
    return out


def tetra_volume(p0, p1, p2, p3) -> float:
    """Volume of the tetrahedron with the given vertices."""
    p0 = np.asarray(p0, dtype=float)
    e = np.stack([np.asarray(p, dtype=float) - p0 for p in (p1, p2, p3)])
    return abs(float(np.linalg.det(e))) / 6.0


# ---------------------------------------------------------------------------
# the curved piece
# ---------------------------------------------------------------------------


def curved_piece_closed_form() -> float:
    """Exact volume of one curved piece: log(2)/3 - 1/6."""
    return math.log(2.0) / 3.0 - 1.0 / 6.0


def curved_piece_quadrature(tol: float) -> QuadratureResult:
    """The curved-piece volume as an iterated integral of
    sqrt(1 + y^2 - x^2) - (1 - x + y) over 0 <= y <= x <= 1."""

    def f(x, y):
        return np.sqrt(np.maximum(1.0 + y * y - x * x, 0.0)) - (1.0 - x + y)

    return cubature.integrate_2d_iterated(f, (0.0, 1.0), lambda y: y, lambda y: 1.0, tol)


def curved_piece_parts_quadrature(tol: float) -> tuple[QuadratureResult, QuadratureResult]:
    """The two summands separately: the hyperboloid roof integral
    (-> log(2)/3 + 1/6) and the plane floor integral (-> 1/3)."""
    roof = cubature.integrate_2d_iterated(
        lambda x, y: np.sqrt(np.maximum(1.0 + y * y - x * x, 0.0)),
        (0.0, 1.0), lambda y: y, lambda y: 1.0, tol,
    )
    floor = cubature.integrate_2d_iterated(
        lambda x, y: 1.0 - x + y,
        (0.0, 1.0), lambda y: y, lambda y: 1.0, tol,
    )
    return roof, floor


def li_integral(tol: float) -> QuadratureResult:
    """A single-variable integral with the same value as the curved piece:
    (1/2) * int_0^1 (z^2+1)(pi/2 - 2 atan z) + z^2 - 1 dz."""

    def g(z):
        return 0.5 * ((z * z + 1.0) * (0.5 * np.pi - 2.0 * np.arctan(z)) + z * z - 1.0)

    return cubature.integrate_1d(g, 0.0, 1.0, tol)


def curved_piece_contains(piece: str, p) -> bool:
    """Membership in one of the three congruent curved pieces S1, S2, S3.

    S2 sits over the triangle 0 <= y <= x <= 1 between the plane
    x - y + z = 1 and the hyperboloid z^2 + x^2 - y^2 = 1; S1 and S3 are its
    images under the cyclic rotation (x, y, z) -> (y, z, x) applied once and
    twice.
    """
    q = np.asarray(p, dtype=float)
    rotations = {"S2": 0, "S1": 1, "S3": 2}
    if piece not in rotations:
        raise ValueError(f"unknown piece {piece!r}")
    for _ in range(rotations[piece]):
        q = np.array([q[1], q[2], q[0]])
    x, y, z = q
    if not (0.0 <= y <= x <= 1.0):
        return False
    return 1.0 - x + y <= z <= math.sqrt(max(1.0 + y * y - x * x, 0.0))


# ---------------------------------------------------------------------------
# rulings of the curved piece
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RulingSegment:
    family: str  # "theta" | "phi"
    parameter: float  # the angle fixing the ruling
    start: np.ndarray
    end: np.ndarray


def ruling_angles(count: int) -> list[float]:
    """Interior angles k * (pi/2) / (count + 1), k = 1..count."""
    return [k * (math.pi / 2.0) / (count + 1) for k in range(1, count + 1)]


def ruling_span(angle: float) -> float:
    """Parameter length sec(angle) - tan(angle), in the stable form
    (1 - sin) / cos."""
    c = math.cos(angle)
    if abs(c) < 1e-15:
        return 0.0
    return (1.0 - math.sin(angle)) / c


def ruling_point(family: str, angle: float, t: float) -> np.ndarray:
    """Point at parameter t along the ruling of the S2 roof fixed by `angle`.

    Both families start on the quarter circle in the xz-plane and stay on
    z^2 + x^2 - y^2 = 1 for every t (the second coordinate equals t).
    """
    s, c = math.sin(angle), math.cos(angle)
    if family == "theta":
        return np.array([s + t * c, t, c - t * s])
    if family == "phi":
        return np.array([c - t * s, t, s + t * c])
    raise ValueError(f"unknown ruling family {family!r}")


def rulings(family: str, count: int) -> list[RulingSegment]:
    """`count` rulings of the given family at evenly spaced interior angles.

    theta rulings end at (1, u, u) and phi rulings at (u, u, 1) with
    u = sec(angle) - tan(angle); both endpoints lie on the plane
    x - y + z = 1 carrying the outer tetrahedron face.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for angle in ruling_angles(count):
        u = ruling_span(angle)
        out.append(
            RulingSegment(
                family=family,
                parameter=angle,
                start=ruling_point(family, angle, 0.0),
                end=ruling_point(family, angle, u),
            )
        )
    return out


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


class CrossCheck(NamedTuple):
    name: str
    lhs: float
    rhs: float
    abs_diff: float


def _check(name: str, lhs: float, rhs: float) -> CrossCheck:
    return CrossCheck(name, float(lhs), float(rhs), abs(float(lhs) - float(rhs)))


@dataclass(frozen=True)
class DecompositionReport:
    """Closed-form decomposition of the tri-hyperboloid volume with
    numerical cross-checks."""

    vol_pi1: float
    vol_pi2: float
    I: float
    I1: float
    I2: float
    V1: float
    total: float
    cross_checks: tuple[CrossCheck, ...]
    converged: bool
    quadrature_I: QuadratureResult
    li: QuadratureResult
    mc: Optional[VolumeEstimate] = None
    octree: Optional[QuadratureResult] = None


def full_report(
    tol: float,
    *,
    mc_samples: int = 0,
    mc_seed: int = 42,
    octree_tol: Optional[float] = None,
    threads: int = 1,
) -> DecompositionReport:
    """Assemble the decomposition: tetrahedra, curved pieces, octant volume
    and total, with quadrature cross-checks at tolerance `tol`.

    Monte Carlo and octree cross-checks are opt-in (mc_samples > 0 /
    octree_tol set) since they cost far more than the closed forms.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")

    vol_pi1 = tetra_volume((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
    vol_pi2 = tetra_volume((1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 1))
    I = curved_piece_closed_form()
    I1 = math.log(2.0) / 3.0 + 1.0 / 6.0
    I2 = 1.0 / 3.0
    V1 = 3.0 * I + vol_pi1 + vol_pi2
    total = 8.0 * V1

    quad_I = curved_piece_quadrature(tol)
    li = li_integral(min(tol, 1e-10))

    checks = [
        _check("I_quadrature_vs_closed", quad_I.value, I),
        _check("li_vs_I", li.value, I),
        _check("total_vs_8log2", total, LOG256),
    ]
    converged = quad_I.converged and li.converged

    mc = None
    if mc_samples > 0:
        mc = montecarlo.estimate(solid(), Box.cube(1.0), mc_samples, mc_seed, threads=threads)
        checks.append(_check("montecarlo_vs_total", mc.value, total))

    octree = None
    if octree_tol is not None:
        octree = cubature.volume_by_octree(solid(), Box.cube(1.0), octree_tol)
        checks.append(_check("octree_vs_total", octree.value, total))
        converged = converged and octree.converged

    return DecompositionReport(
        vol_pi1=vol_pi1,
        vol_pi2=vol_pi2,
        I=I,
        I1=I1,
        I2=I2,
        V1=V1,
        total=total,
        cross_checks=tuple(checks),
        converged=converged,
        quadrature_I=quad_I,
        li=li,
        mc=mc,
        octree=octree,
    )
