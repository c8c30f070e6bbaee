"""Seeded k-means plus the two cluster-level failure simulators.

The simulators rewrite rows of a feature set so that metric sweeps can
dial in a known amount of damage: collapse snaps whole clusters onto
their centroids (diversity loss with support intact), drop deletes whole
clusters and refills the holes by resampling survivors (support loss).
Both derive their k-means run and their cluster ordering from fixed
subkeys of the caller's rng, so sweeping the damage level c under one rng
reuses the same clustering and nests the affected-cluster sets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from genmetrics.errors import ValidationError
from genmetrics.featureset import FeatureSet
from genmetrics.rng import SeededRng

_DEFAULT_MAX_ITER = 300


@dataclass(frozen=True)
class KMeansResult:
    """Converged clustering: centroids (k, d), per-row labels, final inertia.

    inertia_history holds the inertia recorded after each centroid update,
    in iteration order; it is non-increasing.
    """

    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...]

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64)
        a = np.asarray(self.assignment, dtype=np.int64)
        if c.ndim != 2 or a.ndim != 1:
            raise ValidationError("centroids must be 2-D and assignment 1-D")
        if a.min(initial=0) < 0 or a.max(initial=0) >= c.shape[0]:
            raise ValidationError("assignment labels must index into centroids")
        if not np.isfinite(self.inertia) or self.inertia < 0.0:
            raise ValidationError(f"inertia must be finite and >= 0, got {self.inertia}")
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "inertia", float(self.inertia))
        object.__setattr__(self, "inertia_history", tuple(float(v) for v in self.inertia_history))

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _plusplus_init(x: np.ndarray, k: int, g: np.random.Generator) -> np.ndarray:
    """D^2-weighted seeding; falls back to uniform picks once all
    remaining squared distances are zero (duplicated points)."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[int(g.integers(n))]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for t in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(g.choice(n, p=d2 / total))
        else:
            idx = int(g.integers(n))
        centroids[t] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[t]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(assignment: np.ndarray, dist2: np.ndarray, k: int) -> None:
    """Give every empty cluster the point currently farthest from its own
    centroid. Stealing can empty a donor, so process as a queue; a stolen
    point is never stolen twice."""
    counts = np.bincount(assignment, minlength=k)
    queue = deque(int(c) for c in np.flatnonzero(counts == 0))
    if not queue:
        return
    point_cost = dist2[np.arange(assignment.shape[0]), assignment].copy()
    while queue:
        empty = queue.popleft()
        far = int(point_cost.argmax())
        donor = int(assignment[far])
        assignment[far] = empty
        point_cost[far] = -1.0
        counts[donor] -= 1
        counts[empty] += 1
        if counts[donor] == 0:
            queue.append(donor)


def kmeans(fset: FeatureSet, k: int, rng: SeededRng, max_iter: int = _DEFAULT_MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm with D^2-weighted seeding, run to an assignment
    fixpoint (or max_iter)."""
    k = int(k)
    if not 1 <= k <= fset.n:
        raise ValidationError(f"k must satisfy 1 <= k <= n={fset.n}, got {k}")
    x = fset.values64()
    g = rng.generator()
    centroids = _plusplus_init(x, k, g)
    assignment = None
    history = []
    for _ in range(int(max_iter)):
        dist2 = cdist(x, centroids, "sqeuclidean")
        new_assignment = dist2.argmin(axis=1)
        _repair_empty(new_assignment, dist2, k)
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for cluster in range(k):
            centroids[cluster] = x[assignment == cluster].mean(axis=0)
        inertia = float(((x - centroids[assignment]) ** 2).sum())
        history.append(inertia)
    return KMeansResult(centroids, assignment, history[-1], tuple(history))


def _clusters_to_hit(fset: FeatureSet, k: int, c: int, rng: SeededRng, *, allow_all: bool):
    k, c = int(k), int(c)
    hi = k if allow_all else k - 1
    if not 1 <= k <= fset.n:
        raise ValidationError(f"k must satisfy 1 <= k <= n={fset.n}, got {k}")
    if not 0 <= c <= hi:
        raise ValidationError(f"cluster count must satisfy 0 <= c <= {hi}, got {c}")
    result = kmeans(fset, k, rng.derive(0))
    order = rng.derive(1).generator().permutation(k)
    return result, order[:c]


def simulate_mode_collapse(fset: FeatureSet, k: int, c: int, rng: SeededRng) -> FeatureSet:
    """Replace every row of c seeded-chosen clusters with that cluster's
    centroid. c = 0 returns the input rows untouched."""
    result, hit = _clusters_to_hit(fset, k, c, rng, allow_all=True)
    rows = fset.data.copy()
    for cluster in hit:
        rows[result.assignment == cluster] = result.centroids[cluster]
    return FeatureSet(rows, fset.space_tag, name=fset.name)


def simulate_mode_drop(fset: FeatureSet, k: int, c: int, rng: SeededRng) -> FeatureSet:
    """Delete every row of c seeded-chosen clusters and refill each hole
    with a row resampled (with replacement) from the survivors, keeping
    the set's size and row order. c must leave at least one cluster."""
    result, hit = _clusters_to_hit(fset, k, c, rng, allow_all=False)
    rows = fset.data.copy()
    victims = np.flatnonzero(np.isin(result.assignment, hit))
    if victims.size:
        survivors = np.flatnonzero(~np.isin(result.assignment, hit))
        g = rng.derive(2).generator()
        rows[victims] = fset.data[survivors[g.integers(0, survivors.size, size=victims.size)]]
    return FeatureSet(rows, fset.space_tag, name=fset.name)
