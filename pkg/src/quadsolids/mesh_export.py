"""Wireframe and patch geometry of the tri-hyperboloid boundary, as OBJ text.

The wireframe carries the 12 straight edge segments (a stella octangula),
the quarter-circle seams in the coordinate planes, and ruling segments of the
curved pieces, replicated over the whole solid by its symmetry group
(8 sign flips x 3 cyclic rotations).  Patches triangulate the curved pieces
on the ruling parameter grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import trihyperboloid as th

__all__ = ["WireMesh", "build_wireframe", "triangulate_patch", "write_obj"]

_ROTATIONS = [
    np.eye(3),
    np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),  # p -> (y, z, x)
    np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),  # p -> (z, x, y)
]
_SIGNS = [np.array([sx, sy, sz]) for sx in (1.0, -1.0) for sy in (1.0, -1.0) for sz in (1.0, -1.0)]

SYMMETRY_GROUP = [s[None, :] * r for r in _ROTATIONS for s in _SIGNS]
"""The 24 linear maps (as 3x3 matrices) preserving the tri-hyperboloid."""


@dataclass
class WireMesh:
    """Indexed line-segment / triangle soup."""

    vertices: list[np.ndarray] = field(default_factory=list)
    segments: list[tuple[int, int]] = field(default_factory=list)
    faces: list[tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self):
        self._index: dict[tuple[float, float, float], int] = {
            (float(v[0]), float(v[1]), float(v[2])): i for i, v in enumerate(self.vertices)
        }
        self._segment_set = {frozenset(s) for s in self.segments}

    def add_vertex(self, p) -> int:
        """Index of p, deduplicating bit-identical coordinates."""
        key = (float(p[0]), float(p[1]), float(p[2]))
        found = self._index.get(key)
        if found is not None:
            return found
        self._index[key] = len(self.vertices)
        self.vertices.append(np.asarray(p, dtype=float))
        return len(self.vertices) - 1

    def add_segment(self, a, b) -> None:
        i, j = self.add_vertex(a), self.add_vertex(b)
        if i == j:
            raise ValueError("degenerate segment")
        key = frozenset((i, j))
        if key not in self._segment_set:
            self._segment_set.add(key)
            self.segments.append((i, j))

    def add_face(self, a, b, c) -> None:
        self.faces.append((self.add_vertex(a), self.add_vertex(b), self.add_vertex(c)))

    def vertex_array(self) -> np.ndarray:
        if not self.vertices:
            return np.zeros((0, 3))
        return np.stack(self.vertices)


def _seam_angles(rulings_per_family: int) -> list[float]:
    """Ruling angles plus both quarter-circle endpoints."""
    return [0.0] + th.ruling_angles(rulings_per_family) + [math.pi / 2.0]


def build_wireframe(rulings_per_family: int) -> WireMesh:
    """Edge wireframe of the solid.

    Always contains the 12 straight intersection segments with endpoints
    (+-1, +-1, +-1).  With rulings_per_family >= 1 it adds, for every curved
    piece in every octant, both ruling families at the interior angles and
    the quarter-circle seams sampled on the same angular grid.
    """
    if rulings_per_family < 0:
        raise ValueError("rulings_per_family must be >= 0")
    mesh = WireMesh()
    for a, b in th.stella_segments():
        mesh.add_segment(a, b)
    if rulings_per_family == 0:
        return mesh

    # content of the first-octant piece S2, replicated by the symmetry group
    base_segments = []
    angles = _seam_angles(rulings_per_family)
    arc = [th.ruling_point("theta", a, 0.0) for a in angles]
    base_segments.extend(zip(arc[:-1], arc[1:]))
    for family in ("theta", "phi"):
        for seg in th.rulings(family, rulings_per_family):
            base_segments.append((seg.start, seg.end))

    for g in SYMMETRY_GROUP:
        for a, b in base_segments:
            mesh.add_segment(a @ g.T, b @ g.T)
    return mesh


def triangulate_patch(piece: str, resolution: int) -> WireMesh:
    """Triangulated grid over one first-octant curved piece (S1, S2 or S3).

    The grid is uniform in the ruling angle and relative position along each
    ruling; every vertex lies on the carrying hyperboloid exactly.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    rotations = {"S2": _ROTATIONS[0], "S1": _ROTATIONS[1], "S3": _ROTATIONS[2]}
    if piece not in rotations:
        raise ValueError(f"unknown piece {piece!r}")
    g = rotations[piece]

    grid = []
    for i in range(resolution + 1):
        angle = i * (math.pi / 2.0) / resolution
        span = th.ruling_span(angle)
        row = [
            th.ruling_point("theta", angle, span * j / resolution) @ g.T
            for j in range(resolution + 1)
        ]
        grid.append(row)

    mesh = WireMesh()
    for i in range(resolution):
        for j in range(resolution):
            p00, p01 = grid[i][j], grid[i][j + 1]
            p10, p11 = grid[i + 1][j], grid[i + 1][j + 1]
            mesh.add_face(p00, p10, p01)
            mesh.add_face(p01, p10, p11)
    return mesh


def write_obj(mesh: WireMesh) -> str:
    """OBJ text: `v` lines with 17 significant digits, `l` segments and `f`
    faces with 1-based indices, LF line endings."""
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for i, j in mesh.segments:
        lines.append(f"l {i + 1} {j + 1}")
    for i, j, k in mesh.faces:
        lines.append(f"f {i + 1} {j + 1} {k + 1}")
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
