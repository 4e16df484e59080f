"""Classical cylinder-intersection solids as regression targets.

The orthogonal bicylinder occupies two thirds of its circumscribed cube, and
the ratio is invariant under the axis shear that tilts one cylinder, because
affine maps preserve volume ratios.  The tricylinder has no such simple ratio
and is used as a dual-oracle target (octree vs Monte Carlo).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import montecarlo
from .quadric import AffineMap, Box, ImplicitSolid, QuadricForm

__all__ = [
    "CylinderSpec",
    "cylinder_form",
    "bicylinder",
    "bicylinder_box_map",
    "tricylinder",
    "affine_ratio_check",
]


@dataclass(frozen=True)
class CylinderSpec:
    """Infinite circular cylinder around a line through the origin."""

    axis: np.ndarray
    radius: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3).copy()
        norm = float(np.linalg.norm(axis))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("cylinder axis must be a unit vector")
        if self.radius <= 0:
            raise ValueError("cylinder radius must be positive")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)


def cylinder_form(spec: CylinderSpec) -> QuadricForm:
    """|p|^2 - (p.axis)^2 - r^2 <= 0: squared distance to the axis line."""
    u = spec.axis
    m = np.eye(4)
    m[:3, :3] -= np.outer(u, u)
    m[3, 3] = -spec.radius**2
    return QuadricForm(m)


def bicylinder(radius: float, angle: float) -> ImplicitSolid:
    """Two equal cylinders with axes in the xy-plane meeting at `angle`
    (radians), one along the x-axis.

    The attached bounding box comes from the two constraints directly:
    |y|, |z| <= r from the first cylinder and |x sin - y cos| <= r from the
    second, so |x| <= r (1 + cos) / sin.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not 0.0 < angle <= math.pi / 2.0 + 1e-12:
        raise ValueError("angle must lie in (0, pi/2]: parallel cylinders are unbounded")
    c, s = math.cos(angle), math.sin(angle)
    cyl_x = cylinder_form(CylinderSpec(np.array([1.0, 0.0, 0.0]), radius))
    cyl_tilted = cylinder_form(CylinderSpec(np.array([c, s, 0.0]), radius))
    bx = radius * (1.0 + abs(c)) / s
    box = Box((-bx, -radius, -radius), (bx, radius, radius))
    return ImplicitSolid.from_forms([cyl_x, cyl_tilted], bbox=box)


def bicylinder_box_map(angle: float) -> AffineMap:
    """The axis shear taking the orthogonal pair (and its circumscribed
    cube) to the pair meeting at `angle`.

    It maps the y-axis to the tilted axis direction while fixing the x- and
    z-axes, so the image of the cube is the circumscribed parallelepiped of
    the skewed bicylinder (volume 8 r^3 / sin angle).
    """
    c, s = math.cos(angle), math.sin(angle)
    if s == 0.0:
        raise ValueError("angle must not be a multiple of pi")
    a = np.array([[1.0 / s, c / s, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return AffineMap(a, np.zeros(3))


def tricylinder(radius: float) -> ImplicitSolid:
    """Three equal cylinders along the coordinate axes."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    axes = np.eye(3)
    forms = [cylinder_form(CylinderSpec(axes[k], radius)) for k in range(3)]
    return ImplicitSolid.from_forms(forms, bbox=Box.cube(radius))


def affine_ratio_check(
    solid: ImplicitSolid, box: Box, A: AffineMap, n: int, seed: int, *, threads: int = 1
) -> tuple[float, float]:
    """Monte Carlo occupancy ratio of `solid` in `box` before and after the
    affine map A.

    The mapped ratio samples the same pre-image points and pushes them
    through A, so the enclosure of A(solid) stays the exact parallelepiped
    A(box) and the two ratios differ only by the transformed membership
    arithmetic.
    """
    before = montecarlo.hit_rate(solid, box, n, seed, threads=threads)
    after = montecarlo.hit_rate(solid.transformed(A), box, n, seed, threads=threads, map_=A)
    return before, after
