"""Volumes of solids cut out by quadric inequalities.

Three independent volume methods over the same solid representation:
Monte Carlo sampling, octree indicator cubature, and (for the solids with
known decompositions) closed forms, plus a small constraint language and a
wireframe/patch OBJ exporter.
"""

from .quadric import AffineMap, Box, HalfSpace, ImplicitSolid, QuadricForm
from .dsl import ParseError, format_solid, parse_solid
from .montecarlo import VolumeEstimate, estimate, hit_rate
from .cubature import (
    QuadratureResult,
    classify_cell,
    integrate_1d,
    integrate_2d_iterated,
    volume_by_octree,
)

__all__ = [
    "AffineMap",
    "Box",
    "HalfSpace",
    "ImplicitSolid",
    "QuadricForm",
    "ParseError",
    "format_solid",
    "parse_solid",
    "VolumeEstimate",
    "estimate",
    "hit_rate",
    "QuadratureResult",
    "classify_cell",
    "integrate_1d",
    "integrate_2d_iterated",
    "volume_by_octree",
]

__version__ = "0.1.0"
