"""Locally linear embedding of terrain points into the plane, plus the cost value.

The pipeline is the classic three-step LLE:

1. exact k nearest neighbours in 3D (ties broken by lower index),
2. per-point affine reconstruction weights from the regularised local Gram
   system,
3. the bottom eigenvectors of ``M = (I - W)^T (I - W)``, skipping the
   constant one.

Eigenvectors come out unit-norm, so the raw embedding has no physical scale.
``embed`` rescales it (one isotropic factor) so the mean embedded distance
over neighbour pairs equals the mean 3D distance over the same pairs. This
keeps the plane in the same length units as the grid, which the sensing
radius and decay rate assume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import EigenFailure, InvalidRange, KTooLarge, SingularGram

DEFAULT_REG = 1e-3
_ROW_CHUNK = 256

CostMode = Literal["slope", "printed"]
ScaleMode = Literal["metric", "unit", "none"]


@dataclass(frozen=True)
class NeighborTable:
    k: int
    indices: np.ndarray = field(repr=False)  # (N, k) int
    distances: np.ndarray = field(repr=False)  # (N, k) float


@dataclass(frozen=True)
class WeightMatrix:
    matrix: sp.csr_matrix = field(repr=False)
    neighbors: NeighborTable = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def row_weights(self) -> np.ndarray:
        """(N, k) dense weights aligned with ``neighbors.indices``."""
        rows = np.repeat(np.arange(self.n), self.neighbors.k)
        cols = self.neighbors.indices.ravel()
        return np.asarray(self.matrix[rows, cols]).reshape(self.n, self.neighbors.k)


@dataclass(frozen=True)
class Embedding2D:
    coords: np.ndarray = field(repr=False)  # (N, 2)
    altitudes: np.ndarray = field(repr=False)  # (N,)
    dims: tuple[int, int]
    k: int = 0
    seed: int = 0
    eigenvalues: np.ndarray = field(default=None, repr=False)  # 2nd and 3rd smallest of M
    scale: float = 1.0

    @property
    def n(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class CostParams:
    a: float = 4.0
    mode: CostMode = "slope"
    epsilon_h: float = 1e-9

    def __post_init__(self):
        if self.a <= 0 or self.epsilon_h <= 0:
            raise InvalidRange("cost factor and altitude floor must be positive")
        if self.mode not in ("slope", "printed"):
            raise InvalidRange(f"unknown cost mode {self.mode!r}")


def knn(points, k: int) -> NeighborTable:
    """Exact k nearest neighbours by brute force, self excluded.

    Each row is sorted by distance, ties going to the lower index.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if k >= n:
        raise KTooLarge(f"k={k} must be smaller than the number of points ({n})")
    if k < 1:
        raise InvalidRange("k must be at least 1")
    idx = np.empty((n, k), dtype=np.int64)
    dst = np.empty((n, k))
    for start in range(0, n, _ROW_CHUNK):
        block = pts[start:start + _ROW_CHUNK]
        # Direct differences rather than the |a|^2 - 2ab + |b|^2 expansion,
        # so equal distances on lattices compare equal.
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        rows = np.arange(block.shape[0])
        d2[rows, start + rows] = np.inf
        # stable sort keeps index order among equal distances
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        idx[start:start + block.shape[0]] = order
        dst[start:start + block.shape[0]] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return NeighborTable(k, idx, dst)


def reconstruction_weights(points, nbrs: NeighborTable, reg: float = DEFAULT_REG) -> WeightMatrix:
    """Affine reconstruction weights, one row per point.

    Solves ``(G + reg * trace(G) / k * I) w = 1`` for the local Gram matrix
    ``G`` and normalises ``w`` to sum to one.
    """
    if reg < 0:
        raise InvalidRange("reg must be non-negative")
    pts = np.asarray(points, dtype=float)
    n, k = nbrs.indices.shape
    weights = np.empty((n, k))
    ones = np.ones(k)
    for i in range(n):
        z = pts[nbrs.indices[i]] - pts[i]
        gram = z @ z.T
        trace = np.trace(gram)
        if reg > 0:
            gram[np.diag_indices(k)] += reg * trace / k if trace > 0 else reg
        if reg == 0 and np.linalg.cond(gram) > 1e12:
            raise SingularGram(f"local Gram matrix of point {i} is numerically singular")
        try:
            w = np.linalg.solve(gram, ones)
        except np.linalg.LinAlgError as exc:
            raise SingularGram(f"local Gram matrix of point {i} is singular") from exc
        weights[i] = w / w.sum()
    matrix = sp.csr_matrix(
        (weights.ravel(), nbrs.indices.ravel(), np.arange(0, n * k + 1, k)), shape=(n, n)
    )
    return WeightMatrix(matrix, nbrs)


def embedding_matrix(weights: WeightMatrix) -> np.ndarray:
    """Dense ``(I - W)^T (I - W)``."""
    a = sp.identity(weights.n, format="csr") - weights.matrix
    return np.asarray((a.T @ a).toarray())


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(vec)))
    return -vec if vec[pivot] < 0 else vec


def embed(
    weights: WeightMatrix,
    target_dim: int = 2,
    points=None,
    altitudes=None,
    dims: tuple[int, int] | None = None,
    scale: ScaleMode = "metric",
    seed: int = 0,
) -> Embedding2D:
    """Bottom non-constant eigenvectors of ``M`` as planar coordinates.

    ``points`` is needed only for ``scale="metric"``. ``scale="unit"`` gives
    each coordinate unit variance; ``"none"`` keeps unit-norm eigenvectors.
    Dense eigensolve, O(N^3); fine up to a few thousand points.
    """
    n = weights.n
    if target_dim + 1 > n:
        raise InvalidRange("not enough points for the requested dimension")
    m = embedding_matrix(weights)
    try:
        vals, vecs = scipy.linalg.eigh(m, subset_by_index=[0, target_dim])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise EigenFailure("eigensolver returned non-finite values")

    # M's eigenvalues are squared singular values of I - W; recomputing them
    # as |(I - W) v|^2 keeps relative accuracy for the tiny bottom ones,
    # which eigh on M only resolves to about eps * |M| absolute.
    a = sp.identity(n, format="csr") - weights.matrix
    vals = np.array([float(np.sum((a @ vecs[:, c]) ** 2)) for c in range(target_dim + 1)])

    coords = np.column_stack([_fix_sign(vecs[:, c]) for c in range(1, target_dim + 1)])
    coords = coords - coords.mean(axis=0)

    factor = 1.0
    if scale == "metric":
        if points is None:
            raise InvalidRange("metric scaling needs the original points")
        pts = np.asarray(points, dtype=float)
        nb = weights.neighbors.indices
        d3 = np.linalg.norm(pts[nb] - pts[:, None, :], axis=-1).mean()
        d2 = np.linalg.norm(coords[nb] - coords[:, None, :], axis=-1).mean()
        factor = d3 / d2 if d2 > 0 else 1.0
    elif scale == "unit":
        factor = np.sqrt(n)
    elif scale != "none":
        raise InvalidRange(f"unknown scale mode {scale!r}")
    coords = coords * factor

    if altitudes is None:
        altitudes = np.asarray(points, dtype=float)[:, -1] if points is not None else np.zeros(n)
    altitudes = np.asarray(altitudes, dtype=float)
    coords.setflags(write=False)
    return Embedding2D(
        coords=coords,
        altitudes=altitudes,
        dims=dims if dims is not None else (n, 1),
        k=weights.neighbors.k,
        seed=seed,
        eigenvalues=vals[1:].copy(),
        scale=float(factor),
    )


def embed_terrain(terrain, k: int = 6, reg: float = DEFAULT_REG, scale: ScaleMode = "metric") -> Embedding2D:
    """Run the full reduction on a ``TerrainGrid``."""
    pts = terrain.points()
    nbrs = knn(pts, k)
    w = reconstruction_weights(pts, nbrs, reg)
    return embed(
        w, points=pts, altitudes=pts[:, 2], dims=terrain.shape, scale=scale, seed=terrain.seed
    )


def cost_value(e: Embedding2D, i: int, j: int, p: CostParams) -> float:
    if i == j:
        return 0.0
    d = float(np.hypot(*(e.coords[i] - e.coords[j])))
    dh = abs(float(e.altitudes[i] - e.altitudes[j]))
    if p.mode == "printed":
        return d / max(dh, p.epsilon_h)
    return dh / max(d, p.epsilon_h)


def cost_row(e: Embedding2D, i: int, distances: np.ndarray, p: CostParams) -> np.ndarray:
    """Cost value from point ``i`` to every point, given its embedded distances."""
    dh = np.abs(e.altitudes - e.altitudes[i])
    if p.mode == "printed":
        out = distances / np.maximum(dh, p.epsilon_h)
    else:
        out = dh / np.maximum(distances, p.epsilon_h)
    out[i] = 0.0
    return out
