"""Deterministic numerical integration.

Two engines live here:

* adaptive 1-D quadrature with an embedded Gauss 7/15 pair (and its nested
  2-D iteration), used for the reduced single integrals of the closed-form
  volume pipeline;
* an octree indicator cubature that brackets the volume of an implicit solid
  by classifying cells as inside / outside / boundary with sound interval
  bounds on each quadratic constraint.

The octree estimate counts every inside cell in full and every undecided
boundary cell at half volume, so half the total boundary volume is a hard
error bound.  Cell counts are exact integers, which makes results independent
of how the work is scheduled across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .quadric import Box, ImplicitSolid, QuadricForm

__all__ = [
    "QuadratureResult",
    "integrate_1d",
    "integrate_2d_iterated",
    "volume_by_octree",
    "classify_cell",
]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_bound: float
    evaluations: int
    converged: bool


# ---------------------------------------------------------------------------
# adaptive 1-D quadrature
# ---------------------------------------------------------------------------

_G7_X, _G7_W = np.polynomial.legendre.leggauss(7)
_G15_X, _G15_W = np.polynomial.legendre.leggauss(15)
_PAIR_X = np.concatenate([_G7_X, _G15_X])

_EPS = np.finfo(float).eps


def integrate_1d(f, a: float, b: float, tol: float, max_intervals: int = 4096) -> QuadratureResult:
    """Adaptive quadrature of f over [a, b] to absolute tolerance tol.

    f is called with an ndarray of abscissae and must return values
    elementwise.  Each subinterval is estimated with a Gauss 7/15 pair; the
    difference of the two rules is the local error estimate, and intervals
    failing their share of the tolerance are bisected.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if a > b:
        raise ValueError("integration bounds must satisfy a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, True)

    total_len = b - a
    stack = [(float(a), float(b))]
    value = 0.0
    err_total = 0.0
    evals = 0
    intervals = 0

    while stack:
        x0, x1 = stack.pop()
        half = 0.5 * (x1 - x0)
        mid = 0.5 * (x0 + x1)
        fv = np.asarray(f(mid + half * _PAIR_X), dtype=float)
        evals += _PAIR_X.size
        intervals += 1
        g7 = half * float(_G7_W @ fv[:7])
        g15 = half * float(_G15_W @ fv[7:])
        err = abs(g15 - g7)
        local_tol = tol * (x1 - x0) / total_len
        too_small = (x1 - x0) <= 8 * _EPS * max(abs(x0), abs(x1), 1.0)
        if err <= max(local_tol, 4 * _EPS * abs(g15)) or too_small or intervals >= max_intervals:
            value += g15
            err_total += err
        else:
            stack.append((mid, x1))
            stack.append((x0, mid))

    return QuadratureResult(value, err_total, evals, err_total <= tol)


def integrate_2d_iterated(f, outer, inner_lo, inner_hi, tol: float,
                          max_intervals: int = 4096) -> QuadratureResult:
    """Iterated integral of f(x, y) for y in `outer` and x in
    [inner_lo(y), inner_hi(y)].

    The inner integrals are resolved to tol / (2 * outer width) so that after
    the outer integration they contribute at most tol / 2; the outer rule gets
    the other half.  The reported bound adds both conservatively.
    """
    a, b = float(outer[0]), float(outer[1])
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, True)
    width = b - a
    inner_tol = tol / (2.0 * width)

    state = {"evals": 0, "max_bound": 0.0, "all_converged": True}

    def outer_integrand(ys: np.ndarray) -> np.ndarray:
        out = np.empty_like(ys)
        for i, y in enumerate(ys):
            yl, yh = float(inner_lo(y)), float(inner_hi(y))
            r = integrate_1d(lambda xs: f(xs, y), yl, yh, inner_tol, max_intervals)
            state["evals"] += r.evaluations
            state["max_bound"] = max(state["max_bound"], r.abs_error_bound)
            state["all_converged"] &= r.converged
            out[i] = r.value
        return out

    outer_res = integrate_1d(outer_integrand, a, b, tol / 2.0, max_intervals)
    bound = outer_res.abs_error_bound + width * state["max_bound"]
    converged = outer_res.converged and state["all_converged"] and bound <= tol
    return QuadratureResult(outer_res.value, bound, state["evals"], converged)


# ---------------------------------------------------------------------------
# octree indicator cubature
# ---------------------------------------------------------------------------

# Frontier cells are stored as int32 grid indices; streaming kicks in before
# a level could outgrow memory.  Both limits are performance knobs only.
_STREAM_THRESHOLD = 1 << 23
_PARENT_CHUNK = 1 << 21
_SUBTREE_CHUNK = 1 << 18
_MAX_DEPTH_HARD = 21  # per-level range tables hold 2^depth entries per axis

_POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.int64)
_CHILD_OFF = np.array([(b & 1, (b >> 1) & 1, (b >> 2) & 1) for b in range(8)], dtype=np.int32)


def _constraint_arrays(solid: ImplicitSolid):
    """Coefficient arrays for the non-trivial constraints of a solid.

    Identically-zero forms are dropped: they hold everywhere and would
    otherwise defeat the measure-zero argument behind the outside test.
    """
    forms = [q for q in solid.forms if not q.is_zero]
    m = len(forms)
    diag = np.zeros((m, 3))
    croff = np.zeros((m, 3))
    lin = np.zeros((m, 3))
    cst = np.zeros(m)
    for i, q in enumerate(forms):
        co = q.coeffs()
        diag[i] = co[0:3]
        croff[i] = co[3:6]
        lin[i] = co[6:9]
        cst[i] = co[9]
    sep = (np.abs(croff).sum(axis=1) == 0.0).astype(np.uint8)
    return diag, croff, lin, cst, sep


def _form_range_over_box(q: QuadricForm, lo, hi) -> tuple[float, float]:
    """Sound [min, max] enclosure of a quadratic form over an axis box.

    Separable forms (no cross terms) get the exact per-axis range of
    a*t^2 + b*t; cross terms fall back to a centered evaluation that bounds
    the linear part by radius * |gradient| and the quadratic remainder by
    interval products.
    """
    co = q.coeffs()
    diag, croff, lin, cst = co[0:3], co[3:6], co[6:9], co[9]
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if not np.any(croff):
        qmin = qmax = float(cst)
        for k in range(3):
            mn, mx = _axis_quad_range(diag[k], lin[k], lo[k], hi[k])
            qmin += mn
            qmax += mx
        return qmin, qmax
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    a = q.quad
    q0 = float(q.eval(c))
    g = 2.0 * a @ c + q.lin
    lin_rad = float(np.abs(g) @ r)
    dr2 = diag * r * r
    cross_rad = abs(croff[0]) * r[0] * r[1] + abs(croff[1]) * r[0] * r[2] + abs(croff[2]) * r[1] * r[2]
    qlo = float(np.minimum(dr2, 0.0).sum() - cross_rad)
    qhi = float(np.maximum(dr2, 0.0).sum() + cross_rad)
    return q0 - lin_rad + qlo, q0 + lin_rad + qhi


def _axis_quad_range(a: float, b: float, l: float, u: float) -> tuple[float, float]:
    v0 = (a * l + b) * l
    v1 = (a * u + b) * u
    mn, mx = min(v0, v1), max(v0, v1)
    if a != 0.0:
        t = -b / (2.0 * a)
        if l < t < u:
            vt = (a * t + b) * t
            if a > 0.0:
                mn = min(mn, vt)
            else:
                mx = max(mx, vt)
    return mn, mx


def classify_cell(solid: ImplicitSolid, cell: Box) -> str:
    """Classify a cell against a solid: 'inside', 'outside' or 'boundary'.

    'inside' proves every constraint nonpositive on the whole cell;
    'outside' proves some non-trivial constraint nonnegative on the whole
    cell, which pins the overlap inside a quadric surface of measure zero.
    """
    ranges = [
        _form_range_over_box(q, cell.lo, cell.hi)
        for q in solid.forms
        if not q.is_zero
    ]
    if all(mx <= 0.0 for _, mx in ranges):
        return "inside"
    if any(mn >= 0.0 for mn, _ in ranges):
        return "outside"
    return "boundary"


@njit(parallel=True, fastmath=True, cache=True)
def _classify_children_kernel(ix, iy, iz, tmn, tmx, tabs, croff, cst, has_cross,
                              masks, icnt):
    """Classify the 8 children of each parent cell from per-level tables.

    tmn/tmx have shape (m, 3, 2^child_depth): exact range of the separable
    part a*t^2 + b*t of constraint c along each axis over child interval i.
    tabs (3, 2^child_depth) holds max |t| per interval, used to bound cross
    terms by |coeff| * max|x| * max|y|.  masks[p] gets a bit per boundary
    child; icnt[p] the number of inside children.
    """
    n = ix.shape[0]
    m = cst.shape[0]
    for p in prange(n):
        x0 = 2 * ix[p]
        y0 = 2 * iy[p]
        z0 = 2 * iz[p]
        cand_in = np.uint8(0xFF)
        cand_out = np.uint8(0)
        for c in range(m):
            k = cst[c]
            mnx0 = tmn[c, 0, x0]
            mnx1 = tmn[c, 0, x0 + 1]
            mxx0 = tmx[c, 0, x0]
            mxx1 = tmx[c, 0, x0 + 1]
            mny0 = tmn[c, 1, y0]
            mny1 = tmn[c, 1, y0 + 1]
            mxy0 = tmx[c, 1, y0]
            mxy1 = tmx[c, 1, y0 + 1]
            mnz0 = tmn[c, 2, z0]
            mnz1 = tmn[c, 2, z0 + 1]
            mxz0 = tmx[c, 2, z0]
            mxz1 = tmx[c, 2, z0 + 1]
            if has_cross[c]:
                cxy, cxz, cyz = croff[c, 0], croff[c, 1], croff[c, 2]
                ax0 = tabs[0, x0]
                ax1 = tabs[0, x0 + 1]
                ay0 = tabs[1, y0]
                ay1 = tabs[1, y0 + 1]
                az0 = tabs[2, z0]
                az1 = tabs[2, z0 + 1]
                for child in range(8):
                    bit = np.uint8(1 << child)
                    if child & 1:
                        qmin, qmax, mx_ = mnx1, mxx1, ax1
                    else:
                        qmin, qmax, mx_ = mnx0, mxx0, ax0
                    if child & 2:
                        qmin += mny1
                        qmax += mxy1
                        my_ = ay1
                    else:
                        qmin += mny0
                        qmax += mxy0
                        my_ = ay0
                    if child & 4:
                        qmin += mnz1
                        qmax += mxz1
                        mz_ = az1
                    else:
                        qmin += mnz0
                        qmax += mxz0
                        mz_ = az0
                    slack = cxy * mx_ * my_ + cxz * mx_ * mz_ + cyz * my_ * mz_
                    if qmax + k + slack > 0.0:
                        cand_in &= np.uint8(~bit)
                    if qmin + k - slack >= 0.0:
                        cand_out |= bit
            else:
                for child in range(8):
                    bit = np.uint8(1 << child)
                    if child & 1:
                        qmin, qmax = mnx1, mxx1
                    else:
                        qmin, qmax = mnx0, mxx0
                    if child & 2:
                        qmin += mny1
                        qmax += mxy1
                    else:
                        qmin += mny0
                        qmax += mxy0
                    if child & 4:
                        qmin += mnz1
                        qmax += mxz1
                    else:
                        qmin += mnz0
                        qmax += mxz0
                    if qmax + k > 0.0:
                        cand_in &= np.uint8(~bit)
                    if qmin + k >= 0.0:
                        cand_out |= bit
            if cand_in == np.uint8(0) and cand_out == np.uint8(0xFF):
                break
        inside = cand_in
        boundary = np.uint8(0xFF) & np.uint8(~(inside | cand_out))
        masks[p] = boundary
        cnt = 0
        for child in range(8):
            if inside & np.uint8(1 << child):
                cnt += 1
        icnt[p] = cnt


@njit(parallel=True, cache=True)
def _emit_children_kernel(ix, iy, iz, masks, offsets, out_ix, out_iy, out_iz):
    n = ix.shape[0]
    for p in prange(n):
        o = offsets[p]
        mask = masks[p]
        for child in range(8):
            if mask & np.uint8(1 << child):
                out_ix[o] = 2 * ix[p] + (child & 1)
                out_iy[o] = 2 * iy[p] + ((child >> 1) & 1)
                out_iz[o] = 2 * iz[p] + ((child >> 2) & 1)
                o += 1


class _OctreeGrid:
    def __init__(self, solid: ImplicitSolid, box: Box):
        self.box = box
        self.diag, self.croff, self.lin, self.cst, self.sep = _constraint_arrays(solid)
        self.abs_croff = np.abs(self.croff)
        self.has_cross = (1 - self.sep).astype(np.uint8)
        self._tables: dict[int, tuple] = {}

    @property
    def trivial(self) -> bool:
        return self.diag.shape[0] == 0

    def cell_volume(self, depth: int) -> float:
        return self.box.volume / float(8**depth)

    def _level_tables(self, child_depth: int):
        """Per-axis range tables for every grid interval at child_depth."""
        cached = self._tables.get(child_depth)
        if cached is not None:
            return cached
        m = self.cst.shape[0]
        n = 1 << child_depth
        tmn = np.empty((m, 3, n))
        tmx = np.empty((m, 3, n))
        tabs = np.empty((3, n))
        for k in range(3):
            h = float(self.box.widths[k]) / n
            lo = float(self.box.lo[k])
            edges = lo + np.arange(n + 1, dtype=np.float64) * h
            l, u = edges[:-1], edges[1:]
            tabs[k] = np.maximum(np.abs(l), np.abs(u))
            for c in range(m):
                a, b = self.diag[c, k], self.lin[c, k]
                v0 = (a * l + b) * l
                v1 = (a * u + b) * u
                np.minimum(v0, v1, out=tmn[c, k])
                np.maximum(v0, v1, out=tmx[c, k])
                if a != 0.0:
                    t = -b / (2.0 * a)
                    i = int(np.floor((t - lo) / h))
                    if 0 <= i < n and l[i] < t < u[i]:
                        vt = (a * t + b) * t
                        if a > 0.0:
                            tmn[c, k, i] = min(tmn[c, k, i], vt)
                        else:
                            tmx[c, k, i] = max(tmx[c, k, i], vt)
        # keep at most the two deepest levels cached
        if len(self._tables) > 2:
            self._tables.pop(min(self._tables))
        self._tables[child_depth] = (tmn, tmx, tabs)
        return tmn, tmx, tabs

    def refine_level(self, frontier, parent_depth: int, want_children: bool):
        """One refinement sweep: returns (inside count, boundary count, children)."""
        ix, iy, iz = frontier
        tmn, tmx, tabs = self._level_tables(parent_depth + 1)
        inside = 0
        boundary = 0
        kept = []
        for s in range(0, len(ix), _PARENT_CHUNK):
            cix, ciy, ciz = ix[s:s + _PARENT_CHUNK], iy[s:s + _PARENT_CHUNK], iz[s:s + _PARENT_CHUNK]
            masks = np.empty(len(cix), dtype=np.uint8)
            icnt = np.empty(len(cix), dtype=np.uint8)
            _classify_children_kernel(cix, ciy, ciz, tmn, tmx, tabs,
                                      self.abs_croff, self.cst, self.has_cross,
                                      masks, icnt)
            inside += int(icnt.sum(dtype=np.int64))
            counts = _POPCOUNT[masks]
            total = int(counts.sum())
            boundary += total
            if want_children and total:
                offsets = np.zeros(len(counts), dtype=np.int64)
                np.cumsum(counts[:-1], out=offsets[1:])
                out = tuple(np.empty(total, dtype=np.int32) for _ in range(3))
                _emit_children_kernel(cix, ciy, ciz, masks, offsets, *out)
                kept.append(out)
        if not want_children:
            return inside, boundary, None
        if not kept:
            empty = np.empty(0, dtype=np.int32)
            return inside, boundary, (empty, empty, empty)
        children = tuple(np.concatenate([k[a] for k in kept]) for a in range(3))
        return inside, boundary, children

    def stream_descend(self, frontier, depth: int, levels: int):
        """Refine `levels` deep without storing intermediate frontiers globally."""
        ix, iy, iz = frontier
        inside_per_level = [0] * levels
        final_boundary = 0
        cells = 0
        for s in range(0, len(ix), _SUBTREE_CHUNK):
            local = (ix[s:s + _SUBTREE_CHUNK], iy[s:s + _SUBTREE_CHUNK], iz[s:s + _SUBTREE_CHUNK])
            for j in range(levels):
                cells += 8 * len(local[0])
                ic, bc, kids = self.refine_level(local, depth + j, want_children=(j < levels - 1))
                inside_per_level[j] += ic
                if j == levels - 1:
                    final_boundary += bc
                else:
                    local = kids
                    if len(local[0]) == 0:
                        break
        return inside_per_level, final_boundary, cells


def volume_by_octree(solid: ImplicitSolid, box: Box, tol: float,
                     max_depth: int = 24) -> QuadratureResult:
    """Bracket the volume of `solid` inside `box` by octree classification.

    Boundary cells are refined level by level until half their total volume
    is below tol or max_depth is hit.  `box` must enclose the solid (use
    certified_bbox); the returned bound is then a hard bound on the error.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if box.is_degenerate:
        raise ValueError("octree box must have lo < hi on every axis")
    max_depth = min(max_depth, _MAX_DEPTH_HARD)

    grid = _OctreeGrid(solid, box)
    if grid.trivial:
        return QuadratureResult(box.volume, 0.0, 1, True)

    root = classify_cell(solid, box)
    if root == "inside":
        return QuadratureResult(box.volume, 0.0, 1, True)
    if root == "outside":
        return QuadratureResult(0.0, 0.0, 1, True)

    zero = np.zeros(1, dtype=np.int32)
    frontier = (zero, zero.copy(), zero.copy())
    depth = 0
    inside_vol = 0.0
    evals = 1
    bound = 0.5 * box.volume

    while bound > tol and depth < max_depth:
        n_frontier = len(frontier[0])
        if n_frontier > _STREAM_THRESHOLD:
            levels = max(1, int(np.ceil(np.log2(bound / tol))))
            while True:
                levels = min(levels, max_depth - depth)
                per_level, final_boundary, cells = grid.stream_descend(frontier, depth, levels)
                evals += cells
                new_bound = 0.5 * final_boundary * grid.cell_volume(depth + levels)
                if new_bound <= tol or depth + levels >= max_depth:
                    for j, ic in enumerate(per_level):
                        inside_vol += ic * grid.cell_volume(depth + j + 1)
                    depth += levels
                    bound = new_bound
                    break
                levels += 1
            break
        evals += 8 * n_frontier
        ic, bc, children = grid.refine_level(frontier, depth, want_children=True)
        depth += 1
        inside_vol += ic * grid.cell_volume(depth)
        bound = 0.5 * bc * grid.cell_volume(depth)
        frontier = children
        if bc == 0:
            break

    return QuadratureResult(inside_vol + bound, bound, evals, bound <= tol)
