"""Multi-peak Gaussian terrain on an L x W lattice.

Each peak contributes ``omega * Phi((rho * e) ** (1 / eta))`` with
``e = dist ** (-1 / eta)``; the surface is the pointwise maximum over peaks.
Grid coordinates of peaks are 1-based (``1..L``, ``1..W``); the height array
is indexed 0-based, so ``heights[i - 1, j - 1]`` is the height at ``(i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import EmptyPeakSet, InvalidRange

# Peak-center singularity: distances are floored at half a cell.
MIN_PEAK_DISTANCE = 0.5


def std_normal_cdf(z):
    """Standard normal CDF for a scalar or an array.

    Backed by the Cephes ``ndtr`` routine (erf/erfc based, near machine
    precision), which comfortably meets the 1e-7 absolute-error budget.
    Infinite inputs map to 0 and 1.
    """
    out = ndtr(np.asarray(z, dtype=float))
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PeakSpec:
    x: int
    y: int
    omega: float
    rho: float = 1000.0
    eta: float = 4.0

    def __post_init__(self):
        if not (self.omega > 0 and self.rho > 0 and self.eta >= 1):
            raise InvalidRange(
                f"peak needs omega > 0, rho > 0, eta >= 1; got {self.omega}, {self.rho}, {self.eta}"
            )


@dataclass(frozen=True)
class TerrainGrid:
    length: int
    width: int
    heights: np.ndarray = field(repr=False)
    peaks: tuple[PeakSpec, ...]
    seed: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.length, self.width)

    def points(self) -> np.ndarray:
        """(L*W, 3) array of ``(i, j, height)`` in row-major order, 1-based i/j."""
        ii, jj = np.meshgrid(
            np.arange(1, self.length + 1), np.arange(1, self.width + 1), indexing="ij"
        )
        return np.column_stack([ii.ravel(), jj.ravel(), self.heights.ravel()]).astype(float)


def _peak_field(p: PeakSpec, dist):
    dist = np.maximum(dist, MIN_PEAK_DISTANCE)
    e = dist ** (-1.0 / p.eta)
    value = (p.rho * e) ** (1.0 / p.eta)
    return p.omega * std_normal_cdf(value)


def peak_height(p: PeakSpec, i, j):
    """Height contributed by one peak at grid coordinate ``(i, j)``."""
    dist = np.hypot(np.asarray(i, dtype=float) - p.x, np.asarray(j, dtype=float) - p.y)
    out = _peak_field(p, dist)
    return float(out) if np.ndim(out) == 0 else out


def compose_terrain(peaks, length: int, width: int, seed: int = 0) -> TerrainGrid:
    peaks = tuple(peaks)
    if not peaks:
        raise EmptyPeakSet("terrain needs at least one peak")
    if length < 2 or width < 2:
        raise InvalidRange(f"grid must be at least 2x2, got {length}x{width}")
    ii, jj = np.meshgrid(
        np.arange(1, length + 1, dtype=float), np.arange(1, width + 1, dtype=float), indexing="ij"
    )
    heights = np.full((length, width), -np.inf)
    for p in peaks:
        np.maximum(heights, peak_height(p, ii, jj), out=heights)
    heights.setflags(write=False)
    return TerrainGrid(length, width, heights, peaks, seed)


def generate_peaks(
    seed: int,
    count: int,
    length: int,
    width: int,
    rho: float = 1000.0,
    eta: float = 4.0,
    omega_range: tuple[float, float] = (1.0, 100.0),
) -> list[PeakSpec]:
    """Draw ``count`` peaks with uniform integer centers and uniform omega.

    Draw order is fixed (x, y, omega as three vectors), so two calls that
    share a seed but differ only in ``omega_range`` place peaks identically.
    """
    lo, hi = omega_range
    if not (0 < lo <= hi < np.inf):
        raise InvalidRange(f"omega range must satisfy 0 < lo <= hi, got {omega_range}")
    if count < 1:
        raise InvalidRange(f"need at least one peak, got {count}")
    rng = np.random.default_rng(seed)
    xs = rng.integers(1, length + 1, size=count)
    ys = rng.integers(1, width + 1, size=count)
    omegas = lo + (hi - lo) * rng.random(count)
    return [
        PeakSpec(int(x), int(y), float(w), rho, eta) for x, y, w in zip(xs, ys, omegas)
    ]


def random_terrain(
    seed: int,
    count: int = 20,
    length: int = 50,
    width: int = 50,
    rho: float = 1000.0,
    eta: float = 4.0,
    omega_range: tuple[float, float] = (1.0, 100.0),
) -> TerrainGrid:
    peaks = generate_peaks(seed, count, length, width, rho, eta, omega_range)
    return compose_terrain(peaks, length, width, seed)
