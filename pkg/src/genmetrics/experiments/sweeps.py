"""Sweep protocols: seeded end-to-end curves of metric score vs damage level.

A protocol fixes what is swept (mixing fraction, collapsed clusters,
dropped clusters, transformed fraction, sample count, train overlap) and
how the real/generated pair is built at each grid point. run_sweep
executes the protocol once per seed and aggregates each metric's scores
into mean/std series over seeds. Seeds run independently — optionally on
a thread pool sized by GENMETRICS_THREADS — and are always aggregated in
the caller's seed order, so results never depend on scheduling.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from genmetrics.errors import ConfigError, ValidationError
from genmetrics.featureset import FeatureSet, load_feature_file, mix_sets
from genmetrics.metrics import (
    KernelConfig,
    fid,
    inception_score,
    mmd,
    mode_score,
    relative_inverse_score,
)
from genmetrics.nn_test import one_nn_accuracy
from genmetrics.rng import SeededRng
from genmetrics.transport import emd
from genmetrics.experiments.clustering import simulate_mode_collapse, simulate_mode_drop
from genmetrics.experiments.synthetic import (
    generate_gaussian_mixture,
    generate_toy_images,
    toy_feature_map,
    transform_images,
)

PROTOCOLS = (
    "mixing",
    "collapse",
    "drop",
    "transform",
    "sample_efficiency",
    "overfitting",
    "timing",
)

METRIC_NAMES = ("is", "ms", "ris", "rms", "mmd", "wd", "fid", "nn", "nn_real", "nn_fake")

_SWEEP_VARIABLES = {
    "mixing": "mix_fraction",
    "collapse": "collapsed_clusters",
    "drop": "dropped_clusters",
    "transform": "transformed_fraction",
    "sample_efficiency": "n_samples",
    "overfitting": "overlap_ratio",
    "timing": "n_samples",
}

_UNIT_GRID = tuple(float(v) for v in np.linspace(0.0, 1.0, 11))
_SIZE_GRID = (50.0, 100.0, 200.0, 500.0, 1000.0)


class GaussianMixtureSource:
    """Synthetic source; every take() is an independent seeded draw.

    With softmax=True the raw draws are passed through a row-wise softmax
    so the resulting sets carry class-probability rows.
    """

    def __init__(self, means, scales, weights, *, softmax: bool = False):
        self.means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        self.scales = np.asarray(scales, dtype=np.float64).ravel()
        self.weights = np.asarray(weights, dtype=np.float64).ravel()
        self.softmax = bool(softmax)
        # fail fast on bad parameters rather than inside a worker thread
        generate_gaussian_mixture(self.means, self.scales, self.weights, 1, SeededRng(0))

    @property
    def space_tag(self) -> str:
        return "softmax" if self.softmax else "feature"

    def open(self, rng: SeededRng) -> "_MixturePool":
        return _MixturePool(self, rng)


class _MixturePool:
    def __init__(self, source: GaussianMixtureSource, rng: SeededRng):
        self._source = source
        self._rng = rng
        self._takes = 0

    def take(self, count: int) -> FeatureSet:
        src = self._source
        raw = generate_gaussian_mixture(
            src.means, src.scales, src.weights, count, self._rng.derive(self._takes)
        )
        self._takes += 1
        if not src.softmax:
            return raw
        z = raw.values64()
        z = np.exp(z - z.max(axis=1, keepdims=True))
        return FeatureSet(z / z.sum(axis=1, keepdims=True), "softmax")


class FeatureFileSource:
    """File-backed source; each open() deals disjoint seeded-permutation
    blocks of the file's rows, so successive takes never share a row."""

    def __init__(self, path):
        self.path = os.fspath(path)
        self._fset = load_feature_file(self.path)

    @property
    def space_tag(self) -> str:
        return self._fset.space_tag

    def open(self, rng: SeededRng) -> "_FilePool":
        return _FilePool(self._fset, rng)


class _FilePool:
    def __init__(self, fset: FeatureSet, rng: SeededRng):
        self._fset = fset
        self._order = rng.generator().permutation(fset.n)
        self._cursor = 0

    def take(self, count: int) -> FeatureSet:
        count = int(count)
        if self._cursor + count > self._order.shape[0]:
            raise ValidationError(
                f"feature file pool exhausted: need {count} more rows, "
                f"{self._order.shape[0] - self._cursor} left of {self._order.shape[0]}"
            )
        idx = self._order[self._cursor : self._cursor + count]
        self._cursor += count
        return FeatureSet(self._fset.data[idx], self._fset.space_tag)


@dataclass(frozen=True)
class SweepConfig:
    """Everything a protocol needs besides the seed."""

    metrics: tuple[str, ...]
    real: object = None
    gen: object = None
    n: int = 1000
    grid: tuple[float, ...] | None = None
    k: int = 20
    kernel: KernelConfig = field(default_factory=KernelConfig)
    image_h: int = 16
    image_w: int = 16
    feature_map: str = "pixel"
    max_shift: int = 4
    max_angle: float = 15.0
    timing_reps: int = 3

    def __post_init__(self):
        metrics = tuple(self.metrics)
        if not metrics:
            raise ConfigError("at least one metric is required")
        for name in metrics:
            if name not in METRIC_NAMES:
                raise ConfigError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")
        if len(set(metrics)) != len(metrics):
            raise ConfigError("metric names must be unique")
        if int(self.n) < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if int(self.k) < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if int(self.timing_reps) < 1:
            raise ConfigError(f"timing_reps must be >= 1, got {self.timing_reps}")
        if self.feature_map not in ("pixel", "histogram"):
            raise ConfigError(f"feature_map must be 'pixel' or 'histogram', got {self.feature_map!r}")
        object.__setattr__(self, "metrics", metrics)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "timing_reps", int(self.timing_reps))
        if self.grid is not None:
            grid = tuple(float(v) for v in self.grid)
            if not grid:
                raise ConfigError("grid must not be empty")
            object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class MetricSeries:
    """Per-grid-point mean/std of one metric over seeds."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self):
        mean = tuple(float(v) for v in self.mean)
        std = tuple(float(v) for v in self.std)
        if len(mean) != len(std):
            raise ValidationError("mean and std series must have equal length")
        if any(not np.isfinite(v) for v in mean + std):
            raise ValidationError("series values must be finite")
        if any(v < 0.0 for v in std):
            raise ValidationError("standard deviations must be >= 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class ExperimentCurve:
    """Aggregated outcome of one protocol run."""

    protocol: str
    sweep_variable: str
    sweep_values: tuple[float, ...]
    series: dict[str, MetricSeries]
    seeds: tuple[int, ...]
    space_tag: str

    def __post_init__(self):
        values = tuple(float(v) for v in self.sweep_values)
        if not values:
            raise ValidationError("sweep_values must not be empty")
        for name, series in self.series.items():
            if len(series.mean) != len(values):
                raise ValidationError(f"series {name!r} length does not match sweep grid")
        object.__setattr__(self, "sweep_values", values)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


def default_grid(protocol: str, config: SweepConfig) -> tuple[float, ...]:
    if protocol in ("mixing", "transform", "overfitting"):
        return _UNIT_GRID
    if protocol == "collapse":
        return tuple(float(c) for c in range(0, config.k + 1, 2))
    if protocol == "drop":
        return tuple(float(c) for c in range(0, config.k, 2))
    return _SIZE_GRID


def _series_names(protocol: str, config: SweepConfig) -> tuple[str, ...]:
    if protocol == "sample_efficiency":
        names = []
        for m in config.metrics:
            names.extend((f"{m}_rr", f"{m}_rg"))
        return tuple(names)
    return config.metrics


def _resolve_grid(protocol: str, config: SweepConfig) -> tuple[float, ...]:
    grid = config.grid if config.grid is not None else default_grid(protocol, config)
    if protocol in ("mixing", "transform", "overfitting"):
        bad = [v for v in grid if not 0.0 <= v <= 1.0]
        if bad:
            raise ConfigError(f"{protocol} grid values must lie in [0, 1], got {bad}")
    elif protocol in ("collapse", "drop"):
        hi = config.k if protocol == "collapse" else config.k - 1
        bad = [v for v in grid if v != int(v) or not 0 <= int(v) <= hi]
        if bad:
            raise ConfigError(f"{protocol} grid values must be integers in [0, {hi}], got {bad}")
    else:
        bad = [v for v in grid if v != int(v) or int(v) < 2]
        if bad:
            raise ConfigError(f"{protocol} grid values must be integer sizes >= 2, got {bad}")
    return grid


def _needs_gen(protocol: str) -> bool:
    return protocol in ("mixing", "sample_efficiency", "timing")


def _validate(protocol: str, config: SweepConfig) -> tuple[float, ...]:
    if protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    if protocol == "transform":
        if any(m in ("is", "ms", "ris", "rms") for m in config.metrics):
            raise ConfigError("transform protocol produces pixel/histogram sets, not class probabilities")
    else:
        if config.real is None:
            raise ConfigError(f"{protocol} protocol requires a real source")
        if _needs_gen(protocol) and config.gen is None:
            raise ConfigError(f"{protocol} protocol requires a gen source")
    return _resolve_grid(protocol, config)


def _baselines(real: FeatureSet, config: SweepConfig) -> dict[str, float]:
    out = {}
    if "ris" in config.metrics:
        out["is"] = inception_score(real)
    if "rms" in config.metrics:
        out["ms"] = mode_score(real, real)
    return out


def _evaluate(config: SweepConfig, real: FeatureSet, gen: FeatureSet, baselines) -> dict[str, float]:
    scores = {}
    nn_result = None
    for name in config.metrics:
        if name == "is":
            scores[name] = inception_score(gen)
        elif name == "ms":
            scores[name] = mode_score(gen, real)
        elif name == "ris":
            scores[name] = relative_inverse_score(inception_score(gen), baselines["is"])
        elif name == "rms":
            scores[name] = relative_inverse_score(mode_score(gen, real), baselines["ms"])
        elif name == "mmd":
            scores[name] = mmd(real, gen, config.kernel)
        elif name == "wd":
            scores[name] = emd(real, gen)[0]
        elif name == "fid":
            scores[name] = fid(real, gen)
        else:
            if nn_result is None:
                nn_result = one_nn_accuracy(real, gen)
            scores[name] = {
                "nn": nn_result.overall,
                "nn_real": nn_result.real_acc,
                "nn_fake": nn_result.fake_acc,
            }[name]
    return scores


def _append(scores_by_name: dict[str, list[float]], point_scores: dict[str, float]) -> None:
    for name, value in point_scores.items():
        scores_by_name[name].append(float(value))


def _run_mixing(config, grid, rng):
    real_pool = config.real.open(rng.derive(1))
    reference = real_pool.take(config.n)
    mix_pool = real_pool.take(config.n)
    gen_pool = config.gen.open(rng.derive(2)).take(config.n)
    baselines = _baselines(reference, config)
    out = {name: [] for name in config.metrics}
    for gi, t in enumerate(grid):
        mixed = mix_sets(mix_pool, gen_pool, t, config.n, rng.derive(3, gi))
        _append(out, _evaluate(config, reference, mixed, baselines))
    return out


def _run_cluster_damage(config, grid, rng, simulate):
    pool = config.real.open(rng.derive(1))
    reference = pool.take(config.n)
    victim = pool.take(config.n)
    sim_rng = rng.derive(2)
    baselines = _baselines(reference, config)
    out = {name: [] for name in config.metrics}
    for c in grid:
        damaged = simulate(victim, config.k, int(c), sim_rng)
        _append(out, _evaluate(config, reference, damaged, baselines))
    return out


def _run_transform(config, grid, rng):
    reference_images = generate_toy_images(config.n, config.image_h, config.image_w, rng.derive(1))
    base_images = generate_toy_images(config.n, config.image_h, config.image_w, rng.derive(2))
    reference = toy_feature_map(reference_images, config.feature_map)
    out = {name: [] for name in config.metrics}
    for gi, fraction in enumerate(grid):
        warped = transform_images(
            base_images, config.max_shift, config.max_angle, fraction, rng.derive(3, gi)
        )
        gen = toy_feature_map(warped, config.feature_map)
        _append(out, _evaluate(config, reference, gen, baselines={}))
    return out


def _run_sample_efficiency(config, grid, rng):
    real_pool = config.real.open(rng.derive(1))
    gen_pool = config.gen.open(rng.derive(2))
    out = {name: [] for name in _series_names("sample_efficiency", config)}
    for size in grid:
        size = int(size)
        real_a = real_pool.take(size)
        real_b = real_pool.take(size)
        gen = gen_pool.take(size)
        baselines = _baselines(real_a, config)
        for name, value in _evaluate(config, real_a, real_b, baselines).items():
            out[f"{name}_rr"].append(float(value))
        for name, value in _evaluate(config, real_a, gen, baselines).items():
            out[f"{name}_rg"].append(float(value))
    return out


def _run_overfitting(config, grid, rng):
    pool = config.real.open(rng.derive(1))
    train = pool.take(config.n)
    val = pool.take(config.n)
    holdout = pool.take(config.n)
    baselines_train = _baselines(train, config)
    baselines_val = _baselines(val, config)
    out = {name: [] for name in config.metrics}
    for gi, ratio in enumerate(grid):
        gen = mix_sets(holdout, train, ratio, config.n, rng.derive(2, gi))
        against_val = _evaluate(config, val, gen, baselines_val)
        against_train = _evaluate(config, train, gen, baselines_train)
        _append(out, {name: against_val[name] - against_train[name] for name in config.metrics})
    return out


def _run_timing(config, grid, rng):
    real_pool = config.real.open(rng.derive(1))
    gen_pool = config.gen.open(rng.derive(2))
    out = {name: [] for name in config.metrics}
    for size in grid:
        size = int(size)
        real = real_pool.take(size)
        gen = gen_pool.take(size)
        baselines = _baselines(real, config)
        for name in config.metrics:
            reps = []
            for _ in range(config.timing_reps):
                t0 = time.perf_counter()
                _evaluate(
                    SweepConfig(metrics=(name,), kernel=config.kernel, n=config.n, k=config.k),
                    real,
                    gen,
                    baselines,
                )
                reps.append((time.perf_counter() - t0) * 1000.0)
            out[name].append(float(np.median(reps)))
    return out


_RUNNERS = {
    "mixing": _run_mixing,
    "transform": _run_transform,
    "sample_efficiency": _run_sample_efficiency,
    "overfitting": _run_overfitting,
    "timing": _run_timing,
}


def validate_protocol_config(protocol: str, config: SweepConfig) -> tuple[float, ...]:
    """Check a protocol/config pair up front and return the resolved grid.

    Raises ConfigError for anything a seed run would refuse, so callers can
    separate configuration mistakes from per-seed runtime failures.
    """
    return _validate(protocol, config)


def run_seed(protocol: str, config: SweepConfig, seed: int) -> dict[str, list[float]]:
    """One full pass of a protocol under one seed: metric name -> scores
    along the grid."""
    grid = _validate(protocol, config)
    rng = SeededRng(int(seed))
    if protocol == "collapse":
        return _run_cluster_damage(config, grid, rng, simulate_mode_collapse)
    if protocol == "drop":
        return _run_cluster_damage(config, grid, rng, simulate_mode_drop)
    return _RUNNERS[protocol](config, grid, rng)


def _worker_count(task_count: int) -> int:
    raw = os.environ.get("GENMETRICS_THREADS", "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        raise ConfigError(f"GENMETRICS_THREADS must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ConfigError(f"GENMETRICS_THREADS must be >= 0, got {requested}")
    if requested == 0:
        requested = os.cpu_count() or 1
    return max(1, min(requested, task_count))


def _space_tag(protocol: str, config: SweepConfig) -> str:
    if protocol == "transform":
        return "pixel" if config.feature_map == "pixel" else "feature"
    return config.real.space_tag


def aggregate_curve(protocol, config, seeds, per_seed_scores) -> ExperimentCurve:
    """Fold per-seed score lists into an ExperimentCurve (mean/std over
    seeds at each grid point; std uses ddof=1 when more than one seed)."""
    grid = _validate(protocol, config)
    names = _series_names(protocol, config)
    series = {}
    for name in names:
        table = np.array([scores[name] for scores in per_seed_scores], dtype=np.float64)
        std = table.std(axis=0, ddof=1) if table.shape[0] > 1 else np.zeros(table.shape[1])
        series[name] = MetricSeries(tuple(table.mean(axis=0)), tuple(std))
    return ExperimentCurve(
        protocol=protocol,
        sweep_variable=_SWEEP_VARIABLES[protocol],
        sweep_values=grid,
        series=series,
        seeds=tuple(int(s) for s in seeds),
        space_tag=_space_tag(protocol, config),
    )


def run_sweep(protocol: str, config: SweepConfig, seeds) -> ExperimentCurve:
    """Run a protocol across seeds and aggregate.

    Seeds may execute concurrently (GENMETRICS_THREADS caps the pool;
    0 or unset picks the CPU count) but results are always combined in
    the given seed order.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ConfigError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be unique")
    _validate(protocol, config)
    workers = _worker_count(len(seeds))
    if workers == 1:
        per_seed = [run_seed(protocol, config, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(lambda s: run_seed(protocol, config, s), seeds))
    return aggregate_curve(protocol, config, seeds, per_seed)
