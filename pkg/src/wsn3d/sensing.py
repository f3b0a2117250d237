"""Sensor deployment, the gated exponential detection model, and coverage.

A node at point ``i`` detects point ``j`` with probability
``exp(-beta * d_ij) / alpha`` when the cost value between them is at most
the cost factor ``a`` and ``d_ij`` is within the sensing radius; otherwise
zero. Per-node probabilities are fused as independent events.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRange, TooManyNodes
from .manifold import CostMode, CostParams, Embedding2D, cost_row, cost_value


@dataclass(frozen=True)
class SensingModel:
    alpha: float = 3.0
    beta: float = 0.3
    a: float = 4.0
    d_r: float | None = 10.0  # None disables the radius cutoff
    cost_mode: CostMode = "slope"
    epsilon_h: float = 1e-9

    def __post_init__(self):
        if self.alpha < 1 or self.beta <= 0:
            raise InvalidRange(f"need alpha >= 1 and beta > 0, got {self.alpha}, {self.beta}")
        if self.d_r is not None and self.d_r <= 0:
            raise InvalidRange("d_r must be positive (or None to disable)")

    @property
    def cost(self) -> CostParams:
        return CostParams(self.a, self.cost_mode, self.epsilon_h)


@dataclass(frozen=True)
class Deployment:
    node_points: tuple[int, ...]
    seed: int = 0


@dataclass(frozen=True)
class SensingMap:
    probs: np.ndarray = field(repr=False)
    deployment: Deployment
    model: SensingModel
    dims: tuple[int, int]

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def grid(self) -> np.ndarray:
        return self.probs.reshape(self.dims)


def deploy_uniform(seed: int, count: int, embedding: Embedding2D | int, replace: bool = False) -> Deployment:
    """Sample ``count`` sensor sites uniformly at random.

    Sites are drawn without replacement unless ``replace`` is set. ``embedding``
    may also be a bare point count.
    """
    n = embedding if isinstance(embedding, (int, np.integer)) else embedding.n
    if count < 0:
        raise InvalidRange("count must be non-negative")
    if count > n and not replace:
        raise TooManyNodes(f"cannot place {count} distinct nodes on {n} points")
    rng = np.random.default_rng(seed)
    if replace:
        picks = rng.integers(0, n, size=count)
    else:
        picks = rng.permutation(n)[:count]
    return Deployment(tuple(int(p) for p in picks), seed)


def perceived_probability(model: SensingModel, embedding: Embedding2D, node: int, target: int) -> float:
    d = float(np.hypot(*(embedding.coords[node] - embedding.coords[target])))
    if cost_value(embedding, node, target, model.cost) > model.a:
        return 0.0
    if model.d_r is not None and d > model.d_r:
        return 0.0
    return float(np.exp(-model.beta * d) / model.alpha)


def node_probabilities(model: SensingModel, embedding: Embedding2D, node: int) -> np.ndarray:
    """Detection probability from one node to every point."""
    d = np.linalg.norm(embedding.coords - embedding.coords[node], axis=1)
    lam = cost_row(embedding, node, d, model.cost)
    ok = lam <= model.a
    if model.d_r is not None:
        ok &= d <= model.d_r
    return np.where(ok, np.exp(-model.beta * d) / model.alpha, 0.0)


def fuse(per_node_probs) -> float:
    miss = 1.0
    for p in per_node_probs:
        miss *= 1.0 - p
    return 1.0 - miss


def sensing_map(model: SensingModel, embedding: Embedding2D, deployment: Deployment) -> SensingMap:
    miss = np.ones(embedding.n)
    for node in deployment.node_points:
        miss *= 1.0 - node_probabilities(model, embedding, node)
    probs = 1.0 - miss
    probs.setflags(write=False)
    return SensingMap(probs, deployment, model, tuple(embedding.dims))


def covered_count(smap: SensingMap | np.ndarray, p_t: float = 0.8) -> int:
    probs = smap.probs if isinstance(smap, SensingMap) else np.asarray(smap)
    return int(np.count_nonzero(probs >= p_t))


def coverage_ratio(smap: SensingMap | np.ndarray, p_t: float = 0.8) -> float:
    """Share of points whose fused probability reaches ``p_t``."""
    if not 0 <= p_t <= 1:
        raise InvalidRange("threshold must lie in [0, 1]")
    probs = smap.probs if isinstance(smap, SensingMap) else np.asarray(smap)
    return covered_count(probs, p_t) / probs.size


def missed_map(smap: SensingMap | np.ndarray) -> np.ndarray:
    probs = smap.probs if isinstance(smap, SensingMap) else np.asarray(smap, dtype=float)
    return 1.0 - probs
