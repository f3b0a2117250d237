"""Immersion watershed (Vincent & Soille, 1991) on quantised images.

Pixels are flooded level by level in increasing grey value. Within a level,
pixels are processed in order of geodesic distance to the already-flooded
region using a FIFO queue, so plateaus are split by their geodesic skeleton
of influence. A pixel reached from two different basins becomes a watershed
(contour) pixel; pixels at a level that no basin reaches seed new basins.

Scan order is row-major throughout, so results are deterministic. Pixels at
the same level and geodesic distance see each other in FIFO order, so every
pair of adjacent pixels from different basins is separated by a dam.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidRange
from .sensing import SensingMap, missed_map

CONTOUR = -1

# internal label states
_INIT = -1
_MASK = -2
_WSHED = 0

_OFFSETS = {
    4: ((-1, 0), (0, -1), (0, 1), (1, 0)),
    8: ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)),
}


@dataclass(frozen=True)
class GrayImage:
    values: np.ndarray = field(repr=False)  # (L, W) int
    levels: int = 256

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise InvalidRange("gray image must be two-dimensional")
        if v.size and (v.min() < 0 or v.max() > self.levels - 1):
            raise InvalidRange(f"values must lie in [0, {self.levels - 1}]")


@dataclass(frozen=True)
class WatershedResult:
    labels: np.ndarray = field(repr=False)  # basin id >= 1, or CONTOUR
    basin_count: int
    connectivity: int = 8

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def contour_mask(self) -> np.ndarray:
        return self.labels == CONTOUR

    @property
    def contour_pixels(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.labels == CONTOUR)
        return list(zip(rows.tolist(), cols.tolist()))


@lru_cache(maxsize=32)
def neighbor_table(shape: tuple[int, int], connectivity: int = 8) -> tuple[tuple[int, ...], ...]:
    """Flat-index neighbour lists for every pixel of a grid."""
    if connectivity not in _OFFSETS:
        raise InvalidRange("connectivity must be 4 or 8")
    rows, cols = shape
    table = []
    for r in range(rows):
        for c in range(cols):
            table.append(tuple(
                (r + dr) * cols + (c + dc)
                for dr, dc in _OFFSETS[connectivity]
                if 0 <= r + dr < rows and 0 <= c + dc < cols
            ))
    return tuple(table)


def quantize(miss, levels: int = 256, shape: tuple[int, int] | None = None) -> GrayImage:
    """Map values in [0, 1] to integer grey levels by rounding half up."""
    if levels < 2:
        raise InvalidRange("need at least two levels")
    v = np.asarray(miss, dtype=float)
    if v.size and (v.min() < 0 or v.max() > 1):
        raise InvalidRange("values must lie in [0, 1]")
    q = np.floor(v * (levels - 1) + 0.5).astype(np.int64)
    if shape is not None:
        q = q.reshape(shape)
    elif q.ndim == 1:
        q = q.reshape(1, -1)
    return GrayImage(q, levels)


def watershed(img: GrayImage | np.ndarray, connectivity: int = 8) -> WatershedResult:
    values = img.values if isinstance(img, GrayImage) else np.asarray(img)
    if values.ndim == 1:
        values = values.reshape(1, -1)
    shape = values.shape
    flat = values.ravel().tolist()
    n = len(flat)
    nbrs = neighbor_table(shape, connectivity)

    lab = [_INIT] * n
    dist = [0] * n
    order = sorted(range(n), key=flat.__getitem__)  # stable: row-major within a level
    current = 0
    fifo: deque[int] = deque()
    fictitious = -1

    start = 0
    while start < n:
        h = flat[order[start]]
        stop = start
        while stop < n and flat[order[stop]] == h:
            stop += 1
        level = order[start:stop]

        for p in level:
            lab[p] = _MASK
            for q in nbrs[p]:
                if lab[q] >= _WSHED:
                    dist[p] = 1
                    fifo.append(p)
                    break

        curdist = 1
        fifo.append(fictitious)
        while True:
            p = fifo.popleft()
            if p == fictitious:
                if not fifo:
                    break
                fifo.append(fictitious)
                curdist += 1
                p = fifo.popleft()
            # flag: p is a watershed only because a neighbour was one, so a
            # basin neighbour may still claim it
            flag = False
            for q in nbrs[p]:
                lq = lab[q]
                # Any labelled neighbour has already been processed: lower
                # levels entirely, this level up to p in FIFO order. Letting
                # same-distance neighbours count (the scan-order tie-break)
                # keeps distinct basins from ever touching directly.
                if lq >= _WSHED:
                    if lq > 0:
                        lp = lab[p]
                        if lp == _MASK or (lp == _WSHED and flag):
                            lab[p] = lq
                        elif lp > 0 and lp != lq:
                            lab[p] = _WSHED
                            flag = False
                    elif lab[p] == _MASK:
                        lab[p] = _WSHED
                        flag = True
                elif lq == _MASK and dist[q] == 0:
                    dist[q] = curdist + 1
                    fifo.append(q)

        for p in level:
            dist[p] = 0
            if lab[p] == _MASK:
                current += 1
                lab[p] = current
                fifo.append(p)
                while fifo:
                    q = fifo.popleft()
                    for r in nbrs[q]:
                        if lab[r] == _MASK:
                            lab[r] = current
                            fifo.append(r)
        start = stop

    labels = np.array(lab, dtype=np.int64).reshape(shape)
    labels[labels == _WSHED] = CONTOUR
    return WatershedResult(labels, current, connectivity)


def contours_of(smap: SensingMap, levels: int = 256, connectivity: int = 8) -> WatershedResult:
    """Watershed of the quantised missed-detection image of a sensing map."""
    img = quantize(missed_map(smap), levels, shape=tuple(smap.dims))
    return watershed(img, connectivity)
