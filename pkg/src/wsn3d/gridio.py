"""Plain-text file formats.

Grids (terrain heights, sensing maps, labels) share one layout: a header
line ``L W seed`` followed by L rows of W space-separated values. Rows and
columns are 0-based in files; terrain coordinates ``(i, j)`` are 1-based, so
row ``i - 1``, column ``j - 1`` holds the height at ``(i, j)``.

Embeddings: header ``N k seed``, a ``# dims L W`` comment line, then one
``index x y altitude`` row per point.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .manifold import Embedding2D
from .terrain import TerrainGrid


def _fmt9(v: float) -> str:
    return f"{v:.9g}"


def _fmt17(v: float) -> str:
    return f"{v:.17g}"


def write_grid(path, values: np.ndarray, seed: int = 0, fmt=_fmt9) -> None:
    values = np.asarray(values)
    rows, cols = values.shape
    lines = [f"{rows} {cols} {seed}"]
    lines.extend(" ".join(fmt(v) for v in row) for row in values.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path, dtype=float) -> tuple[np.ndarray, int]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    rows, cols, seed = (int(t) for t in lines[0].split())
    data = np.array([[dtype(t) for t in ln.split()] for ln in lines[1:rows + 1]])
    if data.shape != (rows, cols):
        raise ValueError(f"{path}: expected {rows}x{cols} values, found {data.shape}")
    return data, seed


def write_terrain(path, terrain: TerrainGrid) -> None:
    write_grid(path, terrain.heights, terrain.seed)


def read_terrain(path) -> TerrainGrid:
    heights, seed = read_grid(path)
    heights.setflags(write=False)
    return TerrainGrid(heights.shape[0], heights.shape[1], heights, (), seed)


def write_labels(path, labels: np.ndarray, seed: int = 0) -> None:
    write_grid(path, labels, seed, fmt=lambda v: str(int(v)))


def read_labels(path) -> tuple[np.ndarray, int]:
    data, seed = read_grid(path, dtype=int)
    return data.astype(np.int64), seed


def write_embedding(path, e: Embedding2D) -> None:
    lines = [f"{e.n} {e.k} {e.seed}", f"# dims {e.dims[0]} {e.dims[1]}"]
    for i, ((x, y), h) in enumerate(zip(e.coords.tolist(), e.altitudes.tolist())):
        lines.append(f"{i} {_fmt17(x)} {_fmt17(y)} {_fmt17(h)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_embedding(path) -> Embedding2D:
    text = Path(path).read_text().splitlines()
    n, k, seed = (int(t) for t in text[0].split())
    dims = (n, 1)
    rows = []
    for ln in text[1:]:
        if ln.startswith("# dims"):
            dims = tuple(int(t) for t in ln.split()[2:4])
        elif ln.strip() and not ln.startswith("#"):
            rows.append([float(t) for t in ln.split()])
    data = np.array(rows)
    if data.shape != (n, 4):
        raise ValueError(f"{path}: expected {n} rows of 4 values")
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    return Embedding2D(
        coords=data[:, 1:3].copy(), altitudes=data[:, 3].copy(), dims=dims, k=k, seed=seed
    )
