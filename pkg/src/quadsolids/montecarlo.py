"""Seedable Monte Carlo volume estimation over a bounding box.

Sampling uses the counter-based Philox generator keyed by
(seed, chunk index), with a fixed chunk size, so sample i is a pure function
of (seed, i).  Chunks may be evaluated on any number of worker threads; hit
counts are integers summed over chunks, so results are bit-identical
regardless of thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quadric import AffineMap, Box, ImplicitSolid

__all__ = ["VolumeEstimate", "estimate", "hit_rate", "CHUNK_SIZE"]

# Fixed chunk size: part of the determinism contract, do not change casually.
CHUNK_SIZE = 1 << 16

_KEY_MASK = (1 << 128) - 1


@dataclass(frozen=True)
class VolumeEstimate:
    """A volume value with its uncertainty and provenance."""

    value: float
    stderr: float
    n: int
    hits: int
    method: str
    seed: Optional[int] = None

    def agrees_with(self, reference: float, sigma: float = 4.0) -> bool:
        return abs(self.value - reference) <= sigma * self.stderr


def _chunk_points(box: Box, seed: int, chunk: int, m: int) -> np.ndarray:
    bg = np.random.Philox(key=seed & _KEY_MASK, counter=chunk << 64)
    u = np.random.Generator(bg).random((m, 3))
    return box.lo + u * box.widths


def _count_hits(solid: ImplicitSolid, box: Box, seed: int, chunk: int, m: int,
                map_: Optional[AffineMap]) -> int:
    pts = _chunk_points(box, seed, chunk, m)
    if map_ is not None:
        pts = map_(pts)
    return int(np.count_nonzero(solid.contains_points(pts)))


def _total_hits(solid: ImplicitSolid, box: Box, n: int, seed: int,
                threads: int, map_: Optional[AffineMap]) -> int:
    chunks = [(i, min(CHUNK_SIZE, n - i * CHUNK_SIZE)) for i in range((n + CHUNK_SIZE - 1) // CHUNK_SIZE)]
    if threads <= 1 or len(chunks) <= 1:
        return sum(_count_hits(solid, box, seed, i, m, map_) for i, m in chunks)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_count_hits, solid, box, seed, i, m, map_) for i, m in chunks]
        return sum(f.result() for f in futures)


def _check_args(box: Box, n: int) -> None:
    if n < 1:
        raise ValueError("sample count must be >= 1")
    if box.is_degenerate:
        raise ValueError("sampling box must have lo < hi on every axis")


def estimate(solid: ImplicitSolid, box: Box, n: int, seed: int, *,
             threads: int = 1, map_: Optional[AffineMap] = None) -> VolumeEstimate:
    """Estimate the volume of `solid` assuming it is contained in `box`.

    With `map_` given, sample points are pushed through the affine map before
    the membership test and the reported volume refers to the mapped box
    |det| * vol(box); this is the pullback sampling used for parallelepiped
    enclosures.
    """
    _check_args(box, n)
    hits = _total_hits(solid, box, n, seed, threads, map_)
    vol = box.volume if map_ is None else abs(map_.det) * box.volume
    p = hits / n
    return VolumeEstimate(
        value=vol * p,
        stderr=vol * float(np.sqrt(p * (1.0 - p) / n)),
        n=n,
        hits=hits,
        method="mc",
        seed=seed,
    )


def hit_rate(solid: ImplicitSolid, box: Box, n: int, seed: int, *,
             threads: int = 1, map_: Optional[AffineMap] = None) -> float:
    """Fraction of box samples that land inside the solid."""
    _check_args(box, n)
    return _total_hits(solid, box, n, seed, threads, map_) / n
