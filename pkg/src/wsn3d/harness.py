"""Seeded Monte Carlo sweeps over the full coverage pipeline.

One trial runs terrain -> embedding -> deployment -> sensing map ->
watershed -> breach and yields the breach ``p_opt`` plus the coverage ratio.
By default the terrain and its embedding are fixed per sweep (derived from
the master seed) and only the deployment varies between trials; with
``fresh_terrain`` every trial draws its own terrain.

Every random draw is keyed by a hash of (master seed, axis, value, trial),
so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .breach import Branch, build_contour_graph, optimal_breach
from .charts import line_chart
from .errors import InvalidRange, Wsn3dError
from .manifold import Embedding2D, embed_terrain
from .sensing import SensingModel, coverage_ratio, covered_count, deploy_uniform, sensing_map
from .terrain import TerrainGrid, random_terrain
from .watershed import contours_of

AXES = ("beta", "alpha", "k", "a", "count")

DEFAULT_VALUES = {
    "beta": (0.1, 0.2, 0.3, 0.4, 0.5),
    "alpha": (2.0, 3.0, 4.0),
    "k": (6, 7, 8, 9, 10, 11, 12, 13, 14),
    "a": (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0),
    "count": (10, 20, 30, 40, 50, 60, 70),
}

# Parameter envelopes from the coverage-parameter table.
ENVELOPES = {
    "peaks": (1, 100),
    "alpha": (2.0, 4.0),
    "beta": (0.1, 0.5),
    "a": (1.0, 9.0),
    "k": (6, 14),
}

SWEEP_COLUMNS = (
    "axis", "value", "trials", "successes", "failures",
    "mean_p_opt", "std_p_opt", "mean_coverage", "std_coverage",
    "branch_path", "branch_contour_weight", "branch_global_max",
    "p_opt_meets_p_t", "p_opt_meets_p_thed", "coverage_meets_p_t", "coverage_meets_p_thed",
)
RAW_COLUMNS = (
    "axis", "value", "trial", "seed", "p_opt", "coverage_ratio", "covered", "total",
    "branch", "direction", "error",
)


@dataclass(frozen=True)
class ExperimentConfig:
    length: int = 50
    width: int = 50
    peaks: int = 20
    rho: float = 1000.0
    eta: float = 4.0
    omega_range: tuple[float, float] = (1.0, 100.0)
    k: int = 6
    reg: float = 1e-3
    embedding_scale: str = "metric"
    alpha: float = 3.0
    beta: float = 0.3
    a: float = 4.0
    d_r: float | None = 10.0
    cost_mode: str = "slope"
    p_t: float = 0.8
    p_thed: float = 0.9
    count: int = 20
    axis: str | None = None
    values: tuple = ()
    trials: int = 20
    seed: int = 2014
    levels: int = 256
    connectivity: int = 8
    fresh_terrain: bool = False
    unsafe: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega_range", tuple(float(v) for v in self.omega_range))
        object.__setattr__(self, "values", tuple(self.values))
        self.validate()

    def validate(self) -> None:
        if self.trials < 1:
            raise InvalidRange("trials must be at least 1")
        if self.count < 0:
            raise InvalidRange("count must be non-negative")
        if self.axis is not None and self.axis not in AXES:
            raise InvalidRange(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        if self.unsafe:
            return
        checks = {name: getattr(self, name) for name in ENVELOPES}
        checks["omega_min"], checks["omega_max"] = self.omega_range
        bounds = dict(ENVELOPES, omega_min=(1.0, 100.0), omega_max=(1.0, 100.0))
        if self.axis in ENVELOPES:
            for v in self.sweep_values():
                self._check(self.axis, v, ENVELOPES[self.axis])
        for name, v in checks.items():
            if name != self.axis:
                self._check(name, v, bounds[name])

    @staticmethod
    def _check(name, value, bounds):
        lo, hi = bounds
        if not lo <= value <= hi:
            raise InvalidRange(f"{name}={value} outside [{lo}, {hi}]; pass unsafe=True to override")

    def sweep_values(self) -> tuple:
        if self.axis is None:
            return (None,)
        return self.values or DEFAULT_VALUES[self.axis]

    def with_value(self, value) -> "ExperimentConfig":
        if self.axis is None or value is None:
            return self
        cast = int if self.axis in ("k", "count") else float
        return dataclasses.replace(self, **{self.axis: cast(value)})

    def model(self) -> SensingModel:
        return SensingModel(self.alpha, self.beta, self.a, self.d_r, self.cost_mode)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["omega_range"] = list(self.omega_range)
        d["values"] = list(self.values)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidRange(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary JSON-serialisable parts."""
    blob = json.dumps(parts, sort_keys=True, default=repr).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little") >> 1


@dataclass(frozen=True)
class TrialContext:
    terrain: TerrainGrid
    embedding: Embedding2D


def _terrain_for(cfg: ExperimentConfig, seed: int) -> TerrainGrid:
    return random_terrain(
        seed, cfg.peaks, cfg.length, cfg.width, cfg.rho, cfg.eta, cfg.omega_range
    )


@lru_cache(maxsize=16)
def _cached_context(terrain_key: tuple, k: int, reg: float, scale: str) -> TrialContext:
    seed, peaks, length, width, rho, eta, omega_range = terrain_key
    terrain = random_terrain(seed, peaks, length, width, rho, eta, omega_range)
    return TrialContext(terrain, embed_terrain(terrain, k, reg, scale))


def sweep_context(cfg: ExperimentConfig) -> TrialContext:
    """Terrain and embedding shared by every trial of a sweep point."""
    key = (
        derive_seed(cfg.seed, "terrain"), cfg.peaks, cfg.length, cfg.width,
        cfg.rho, cfg.eta, cfg.omega_range,
    )
    return _cached_context(key, cfg.k, cfg.reg, cfg.embedding_scale)


@dataclass(frozen=True)
class TrialRecord:
    axis: str
    value: object
    trial: int
    seed: int
    p_opt: float
    coverage_ratio: float
    covered: int
    total: int
    branch: str
    direction: str
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def row(self) -> list[str]:
        return [
            self.axis, _fmt(self.value), str(self.trial), str(self.seed), _fmt(self.p_opt),
            _fmt(self.coverage_ratio), str(self.covered), str(self.total),
            self.branch, self.direction, self.error,
        ]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_trial(cfg: ExperimentConfig, sweep_value=None, trial_index: int = 0, context: TrialContext | None = None) -> TrialRecord:
    c = cfg.with_value(sweep_value)
    seed = derive_seed(cfg.seed, cfg.axis, sweep_value, trial_index)
    if c.fresh_terrain:
        terrain = _terrain_for(c, derive_seed(seed, "terrain"))
        context = TrialContext(terrain, embed_terrain(terrain, c.k, c.reg, c.embedding_scale))
    elif context is None:
        context = sweep_context(c)
    emb = context.embedding
    base = dict(axis=cfg.axis or "", value=sweep_value, trial=trial_index, seed=seed)

    covered, cov = 0, float("nan")
    try:
        deployment = deploy_uniform(seed, c.count, emb)
        smap = sensing_map(c.model(), emb, deployment)
        covered = covered_count(smap, c.p_t)
        cov = coverage_ratio(smap, c.p_t)
        ws = contours_of(smap, c.levels, c.connectivity)
        result = optimal_breach(build_contour_graph(ws, smap))
    except Wsn3dError as exc:
        return TrialRecord(
            **base, p_opt=float("nan"), coverage_ratio=cov, covered=covered,
            total=emb.n, branch="", direction="", error=type(exc).__name__,
        )
    return TrialRecord(
        **base, p_opt=float(result.p_opt), coverage_ratio=float(cov), covered=covered,
        total=emb.n, branch=result.branch.value, direction=result.direction.value,
    )


@dataclass(frozen=True)
class SweepPoint:
    value: object
    records: tuple[TrialRecord, ...] = field(repr=False)
    mean_p_opt: float = float("nan")
    std_p_opt: float = float("nan")
    mean_coverage: float = float("nan")
    std_coverage: float = float("nan")
    failures: int = 0
    branches: dict = field(default_factory=dict)

    @classmethod
    def from_records(cls, value, records) -> "SweepPoint":
        good = [r for r in records if r.ok]
        p = np.array([r.p_opt for r in good])
        cov = np.array([r.coverage_ratio for r in good])
        tally = {b.value: sum(r.branch == b.value for r in good) for b in Branch}
        nan = float("nan")
        return cls(
            value=value,
            records=tuple(records),
            mean_p_opt=float(p.mean()) if good else nan,
            std_p_opt=float(p.std()) if good else nan,
            mean_coverage=float(cov.mean()) if good else nan,
            std_coverage=float(cov.std()) if good else nan,
            failures=len(records) - len(good),
            branches=tally,
        )


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    points: tuple[SweepPoint, ...]

    @property
    def axis(self) -> str:
        return self.config.axis or ""

    def values(self) -> list:
        return [pt.value for pt in self.points]

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points], dtype=float)


def _trial_task(args):
    cfg, value, trial, context = args
    return run_trial(cfg, value, trial, context)


def sweep(cfg: ExperimentConfig, jobs: int = 1) -> SweepResult:
    values = cfg.sweep_values()
    contexts = {}
    if not cfg.fresh_terrain:
        for v in values:
            contexts[v] = sweep_context(cfg.with_value(v))
    tasks = [
        (cfg, v, t, contexts.get(v))
        for v in values
        for t in range(cfg.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_trial_task(t) for t in tasks]
    # map() preserves submission order, so grouping by position is schedule-free
    points = tuple(
        SweepPoint.from_records(v, records[i * cfg.trials:(i + 1) * cfg.trials])
        for i, v in enumerate(values)
    )
    return SweepResult(cfg, points)


def _meets(v: float, threshold: float) -> str:
    return "" if math.isnan(v) else str(int(v >= threshold))


def sweep_csv(result: SweepResult | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    if result is not None:
        cfg = result.config
        for pt in result.points:
            w.writerow([
                result.axis, _fmt(pt.value), len(pt.records), len(pt.records) - pt.failures,
                pt.failures, _fmt(pt.mean_p_opt), _fmt(pt.std_p_opt),
                _fmt(pt.mean_coverage), _fmt(pt.std_coverage),
                pt.branches.get("PATH", 0), pt.branches.get("CONTOUR_WEIGHT", 0),
                pt.branches.get("GLOBAL_MAX", 0),
                _meets(pt.mean_p_opt, cfg.p_t), _meets(pt.mean_p_opt, cfg.p_thed),
                _meets(pt.mean_coverage, cfg.p_t), _meets(pt.mean_coverage, cfg.p_thed),
            ])
    return buf.getvalue()


def raw_csv(result: SweepResult | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RAW_COLUMNS)
    if result is not None:
        for pt in result.points:
            for r in pt.records:
                w.writerow(r.row())
    return buf.getvalue()


def emit(result: SweepResult | None, out_dir) -> list[Path]:
    """Write ``sweep.csv``, ``raw.csv`` and two SVG charts into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    axis = result.axis if result is not None else ""
    xs = [float(v) for v in result.values()] if result is not None else []
    p = list(result.series("mean_p_opt")) if result is not None else []
    cov = list(result.series("mean_coverage")) if result is not None else []
    files = {
        "sweep.csv": sweep_csv(result),
        "raw.csv": raw_csv(result),
        "chart_popt.svg": line_chart(xs, p, "Mean optimal coverage probability", axis, "p_opt", 0.0, 1.0),
        "chart_coverage.svg": line_chart(xs, cov, "Mean coverage ratio", axis, "coverage ratio", 0.0, 1.0),
    }
    paths = []
    for name, text in files.items():
        path = out / name
        with open(path, "w", newline="") as fh:
            fh.write(text)
        paths.append(path)
    return paths
