"""Quadric half-spaces and their intersections.

A quadric polynomial p(x, y, z) of total degree <= 2 is stored as a symmetric
4x4 matrix m acting on homogeneous coordinates v = (x, y, z, 1), so that
p(v) = v^T m v.  Affine changes of coordinates then act by congruence, which
gives a single code path for transforming any solid built from such
constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "QuadricForm",
    "HalfSpace",
    "ImplicitSolid",
    "AffineMap",
    "Box",
]

# Monomial order used for coefficient vectors throughout the package.
COEFF_ORDER = ("x^2", "y^2", "z^2", "x*y", "x*z", "y*z", "x", "y", "z", "1")


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


def _as_points(pts) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array of points, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class QuadricForm:
    """Symmetric homogeneous matrix of a degree-<=2 polynomial in x, y, z."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"quadric matrix must be 4x4, got {m.shape}")
        m = 0.5 * (m + m.T)  # symmetrize; eval only sees the symmetric part
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[float]) -> "QuadricForm":
        """Build from the 10 coefficients in COEFF_ORDER."""
        xx, yy, zz, xy, xz, yz, x, y, z, c = (float(v) for v in coeffs)
        m = np.array(
            [
                [xx, xy / 2, xz / 2, x / 2],
                [xy / 2, yy, yz / 2, y / 2],
                [xz / 2, yz / 2, zz, z / 2],
                [x / 2, y / 2, z / 2, c],
            ]
        )
        return cls(m)

    def coeffs(self) -> np.ndarray:
        """The 10 polynomial coefficients in COEFF_ORDER."""
        m = self.m
        return np.array(
            [
                m[0, 0],
                m[1, 1],
                m[2, 2],
                2 * m[0, 1],
                2 * m[0, 2],
                2 * m[1, 2],
                2 * m[0, 3],
                2 * m[1, 3],
                2 * m[2, 3],
                m[3, 3],
            ]
        )

    @property
    def quad(self) -> np.ndarray:
        """3x3 pure-quadratic block."""
        return self.m[:3, :3]

    @property
    def lin(self) -> np.ndarray:
        """Linear coefficient vector (b such that p = x^T A x + b.x + c)."""
        return 2 * self.m[:3, 3]

    @property
    def const(self) -> float:
        return float(self.m[3, 3])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.m)

    def eval(self, p) -> float:
        """Polynomial value at a single point."""
        v = np.append(_as_point(p), 1.0)
        return float(v @ self.m @ v)

    def eval_points(self, pts) -> np.ndarray:
        """Polynomial values at an (n, 3) array of points."""
        x = _as_points(pts)
        return np.einsum("ij,ij->i", x @ self.quad, x) + x @ self.lin + self.const

    def __call__(self, p) -> float:
        return self.eval(p)

    def transformed(self, inverse_homogeneous: np.ndarray) -> "QuadricForm":
        """Congruence by the homogeneous matrix of the *inverse* point map."""
        h = np.asarray(inverse_homogeneous, dtype=float)
        return QuadricForm(h.T @ self.m @ h)


@dataclass(frozen=True)
class HalfSpace:
    """The closed region q(x, y, z) <= 0."""

    q: QuadricForm

    def contains(self, p) -> bool:
        return self.q.eval(p) <= 0.0

    def contains_points(self, pts) -> np.ndarray:
        return self.q.eval_points(pts) <= 0.0


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, lo < hi required per axis unless degenerate allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(3).copy()
        hi = np.asarray(self.hi, dtype=float).reshape(3).copy()
        if np.any(hi < lo):
            raise ValueError(f"box has hi < lo: lo={lo}, hi={hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, half_width: float, center=(0.0, 0.0, 0.0)) -> "Box":
        c = _as_point(center)
        return cls(c - half_width, c + half_width)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.hi <= self.lo))

    def contains_points(self, pts) -> np.ndarray:
        x = _as_points(pts)
        return np.all((x >= self.lo) & (x <= self.hi), axis=1)

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)


@dataclass(frozen=True)
class AffineMap:
    """Invertible affine map p -> a @ p + b of 3-space."""

    a: np.ndarray
    b: np.ndarray
    det: float = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3, 3).copy()
        b = np.asarray(self.b, dtype=float).reshape(3).copy()
        det = float(np.linalg.det(a))
        if det == 0.0 or not np.isfinite(det):
            raise ValueError("affine map must be invertible (det != 0)")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "det", det)

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def scaling(cls, factors) -> "AffineMap":
        f = np.atleast_1d(np.asarray(factors, dtype=float))
        if f.size == 1:
            f = np.repeat(f, 3)
        return cls(np.diag(f), np.zeros(3))

    @classmethod
    def translation(cls, offset) -> "AffineMap":
        return cls(np.eye(3), _as_point(offset))

    def __call__(self, pts):
        x = np.asarray(pts, dtype=float)
        if x.ndim == 1:
            return self.a @ x + self.b
        return x @ self.a.T + self.b

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: (self.compose(other))(p) == self(other(p))."""
        return AffineMap(self.a @ other.a, self.a @ other.b + self.b)

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        return self.compose(other)

    def inverse(self) -> "AffineMap":
        ainv = np.linalg.inv(self.a)
        return AffineMap(ainv, -ainv @ self.b)

    def inverse_homogeneous(self) -> np.ndarray:
        """4x4 homogeneous matrix of the inverse point map."""
        ainv = np.linalg.inv(self.a)
        h = np.eye(4)
        h[:3, :3] = ainv
        h[:3, 3] = -ainv @ self.b
        return h

    def image_of_box(self, box: Box) -> np.ndarray:
        """The 8 mapped corner points of a box (a parallelepiped)."""
        corners = np.array(
            [[box.lo[i] if (k >> i) & 1 == 0 else box.hi[i] for i in range(3)] for k in range(8)]
        )
        return self(corners)


@dataclass(frozen=True)
class ImplicitSolid:
    """Finite intersection of quadric half-spaces."""

    constraints: tuple[HalfSpace, ...]
    bbox: Optional[Box] = None

    def __post_init__(self):
        cs = tuple(self.constraints)
        if not cs:
            raise ValueError("a solid needs at least one constraint")
        if not all(isinstance(c, HalfSpace) for c in cs):
            raise TypeError("constraints must be HalfSpace instances")
        object.__setattr__(self, "constraints", cs)

    @classmethod
    def from_forms(cls, forms: Sequence[QuadricForm], bbox: Optional[Box] = None) -> "ImplicitSolid":
        return cls(tuple(HalfSpace(q) for q in forms), bbox)

    @property
    def forms(self) -> tuple[QuadricForm, ...]:
        return tuple(c.q for c in self.constraints)

    def contains(self, p) -> bool:
        q = _as_point(p)
        return all(c.q.eval(q) <= 0.0 for c in self.constraints)

    def contains_points(self, pts) -> np.ndarray:
        x = _as_points(pts)
        inside = np.ones(len(x), dtype=bool)
        for c in self.constraints:
            np.logical_and(inside, c.q.eval_points(x) <= 0.0, out=inside)
            if not inside.any():
                break
        return inside

    def transformed(self, A: AffineMap) -> "ImplicitSolid":
        """The image solid A(S); membership satisfies A(S).contains(A(p)) == S.contains(p)."""
        h = A.inverse_homogeneous()
        forms = tuple(c.q.transformed(h) for c in self.constraints)
        bbox = None
        if self.bbox is not None:
            corners = A.image_of_box(self.bbox)
            if _is_axis_aligned(A.a):
                bbox = Box(corners.min(axis=0), corners.max(axis=0))
        return ImplicitSolid.from_forms(forms, bbox)

    def certified_bbox(self) -> Optional[Box]:
        """A box proven to contain the solid, or None if the heuristic fails.

        Soundness argument: for any single constraint or sum of two
        constraints f <= 0, write f along axis k as
        a*t^2 + b*t + (other squares with coefficients >= 0) + const.
        If there are no cross terms, no linear terms in the other axes and
        the other squares enter nonnegatively, dropping them preserves
        a*t^2 + b*t + const <= 0, whose solution set is an interval.
        """
        candidates = []
        forms = [c.q for c in self.constraints]
        n = len(forms)
        for i in range(n):
            candidates.append(forms[i].coeffs())
            for j in range(i + 1, n):
                candidates.append(forms[i].coeffs() + forms[j].coeffs())

        lo = np.full(3, -np.inf)
        hi = np.full(3, np.inf)
        for axis in range(3):
            for co in candidates:
                interval = _axis_interval(co, axis)
                if interval is None:
                    continue
                lo[axis] = max(lo[axis], interval[0])
                hi[axis] = min(hi[axis], interval[1])
        if np.any(np.isinf(lo)) or np.any(np.isinf(hi)):
            return None
        hi = np.maximum(hi, lo)  # empty solids may certify crossed intervals
        return Box(lo, hi)


def _is_axis_aligned(a: np.ndarray) -> bool:
    """True if the linear map sends axis directions to axis directions."""
    return all(np.count_nonzero(np.abs(a[:, j]) > 0) == 1 for j in range(3))


def _axis_interval(coeffs: np.ndarray, axis: int):
    """Interval for one coordinate implied by `coeffs <= 0`, or None."""
    sq = coeffs[:3]
    cross = coeffs[3:6]
    lin = coeffs[6:9]
    const = coeffs[9]
    if np.any(cross != 0):
        return None
    others = [k for k in range(3) if k != axis]
    if any(sq[k] < 0 for k in others) or any(lin[k] != 0 for k in others):
        return None
    a, b, c = sq[axis], lin[axis], const
    if a <= 0:
        return None
    disc = b * b - 4 * a * c
    if disc < 0:
        # combined constraint infeasible: the solid is empty
        v = -b / (2 * a)
        return (v, v)
    r = np.sqrt(disc)
    return ((-b - r) / (2 * a), (-b + r) / (2 * a))
