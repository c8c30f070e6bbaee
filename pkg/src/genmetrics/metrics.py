"""Scalar scores between point sets.

Three families live here:

* exponentiated-KL scores on classifier softmax outputs (``inception_score``
  and ``mode_score``), plus the relative-inverse rescaling that turns
  "bigger is better" scores into distances against a real-data baseline;
* kernel maximum mean discrepancy with a Gaussian kernel, reported on the
  distance scale (square root of the squared discrepancy);
* the Frechet distance between Gaussian moment fits of the two sets.

Every computation runs in float64 regardless of how the sets are stored.
Kernel reductions use numpy's fixed pairwise summation order, so repeated
runs agree bit for bit no matter what thread cap is in force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from genmetrics.errors import (
    DimensionError,
    DomainError,
    InsufficientSamplesError,
    ValidationError,
)
from genmetrics.featureset import FeatureSet, euclidean_matrix

#: probabilities are clamped to at least this before any log
PROB_FLOOR = 1e-12

#: sentinel bandwidth: pick sigma from the pooled pairwise distances
MEDIAN_BANDWIDTH = "median"

_COV_EPS = 1e-6  # ridge added to rank-deficient covariance fits


@dataclass(frozen=True)
class KernelConfig:
    """Kernel choice for discrepancy computations.

    ``bandwidth`` is either a positive sigma or :data:`MEDIAN_BANDWIDTH`,
    which selects the median pooled pairwise distance at call time.
    """

    kind: str = "gaussian"
    bandwidth: float | str = MEDIAN_BANDWIDTH

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != MEDIAN_BANDWIDTH:
                raise ValidationError(
                    f"bandwidth must be a positive number or {MEDIAN_BANDWIDTH!r}"
                )
        else:
            bw = float(self.bandwidth)
            if not math.isfinite(bw) or bw <= 0.0:
                raise ValidationError(f"fixed bandwidth must be finite and > 0, got {bw}")
            object.__setattr__(self, "bandwidth", bw)


@dataclass(frozen=True)
class GaussianFit:
    """First and second moments of a set: mean vector and covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1:
            raise ValidationError(f"mean must be 1-D, got shape {mean.shape}")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValidationError(f"covariance must be ({d}, {d}), got {cov.shape}")
        asym = float(np.abs(cov - cov.T).max()) if d else 0.0
        if asym > 1e-10:
            raise ValidationError(f"covariance must be symmetric within 1e-10, asymmetry {asym:.3g}")
        lo = float(np.linalg.eigvalsh(cov).min())
        if lo < -1e-8:
            raise ValidationError(f"covariance must be PSD within -1e-8, smallest eigenvalue {lo:.3g}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


@dataclass(frozen=True)
class MetricReport:
    """A named score plus context for serialization."""

    metric_name: str
    score: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValidationError(f"{self.metric_name}: score must be finite, got {self.score}")
        wt = self.meta.get("wall_time_ms")
        if wt is not None and wt < 0:
            raise ValidationError("wall_time_ms cannot be negative")


def _clean_probs(fset: FeatureSet, what: str) -> np.ndarray:
    if fset.space_tag != "softmax":
        raise ValidationError(
            f"{what} needs softmax-space input, got space tag {fset.space_tag!r}"
        )
    p = np.maximum(fset.values64(), PROB_FLOOR)
    return p / p.sum(axis=1, keepdims=True)


def inception_score(gen: FeatureSet) -> float:
    """exp of the mean row-to-marginal KL divergence of softmax outputs.

    Rows are clamped to PROB_FLOOR and renormalized before the logs, so
    hard one-hot rows are handled without infinities. Lives in [1, K] for
    K classes: 1 when every row equals the marginal, K for a balanced
    one-hot population.
    """
    p = _clean_probs(gen, "inception_score")
    marginal = p.mean(axis=0)
    kl = (p * (np.log(p) - np.log(marginal))).sum(axis=1)
    return float(np.exp(kl.mean()))


def mode_score(gen: FeatureSet, real: FeatureSet) -> float:
    """Inception-style score penalized by drift from the real label marginal.

    exp( E_x KL(p(y|x) || p_g(y)) - KL(p_g(y) || p_r(y)) ), where p_g and
    p_r are the gen / real marginals. Equals inception_score(gen) when the
    two marginals coincide.
    """
    if gen.d != real.d:
        raise DimensionError(f"class-count mismatch: gen has {gen.d}, real has {real.d}")
    pg = _clean_probs(gen, "mode_score")
    pr = _clean_probs(real, "mode_score")
    mg = pg.mean(axis=0)
    mr = pr.mean(axis=0)
    kl_rows = (pg * (np.log(pg) - np.log(mg))).sum(axis=1).mean()
    kl_marginals = float((mg * (np.log(mg) - np.log(mr))).sum())
    return float(np.exp(kl_rows - kl_marginals))


def relative_inverse_score(score: float, baseline: float) -> float:
    """1 - score/baseline: 0 when the score reaches the baseline, bigger is worse.

    Used to put "higher is better" scores on the same footing as the
    distance-like metrics; the baseline is the same score measured on held
    out real data.
    """
    baseline = float(baseline)
    if not math.isfinite(baseline) or baseline <= 0.0:
        raise DomainError(f"baseline must be finite and > 0, got {baseline}")
    return 1.0 - float(score) / baseline


def median_heuristic_bandwidth(a: FeatureSet, b: FeatureSet) -> float:
    """Median pairwise distance over the pooled points.

    Self-pairs (the diagonal) are excluded; duplicate-point zeros are not.
    Falls back to 1.0 when every pooled distance is zero, so downstream
    kernels never divide by zero.
    """
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    pooled = FeatureSet(
        np.concatenate([a.values64(), b.values64()], axis=0), "feature"
    )
    dists = euclidean_matrix(pooled, pooled)
    iu = np.triu_indices(pooled.n, k=1)
    med = float(np.median(dists[iu]))
    return 1.0 if med <= 0.0 else med


def _resolve_bandwidth(a: FeatureSet, b: FeatureSet, kernel: KernelConfig) -> float:
    if kernel.bandwidth == MEDIAN_BANDWIDTH:
        return median_heuristic_bandwidth(a, b)
    return float(kernel.bandwidth)


def mmd(a: FeatureSet, b: FeatureSet, kernel: KernelConfig | None = None) -> float:
    """Kernel maximum mean discrepancy, reported on the distance scale.

    Uses the biased V-statistic (self-pairs included) with the Gaussian
    kernel k(x, y) = exp(-||x - y||^2 / (2 sigma^2)); the squared estimate
    is clamped at zero before the square root. Identical inputs give an
    exact 0.0 because the three kernel blocks then cancel bit for bit.
    """
    if kernel is None:
        kernel = KernelConfig()
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    sigma = _resolve_bandwidth(a, b, kernel)
    denom = 2.0 * sigma * sigma

    def kblock(x: FeatureSet, y: FeatureSet) -> float:
        dist = euclidean_matrix(x, y)
        return float(np.exp(-(dist * dist) / denom).mean())

    m2 = kblock(a, a) + kblock(b, b) - 2.0 * kblock(a, b)
    return float(np.sqrt(max(m2, 0.0)))


def fit_gaussian(fset: FeatureSet) -> GaussianFit:
    """Sample mean and covariance (1/(n-1) normalization) of a set."""
    if fset.n < 2:
        raise InsufficientSamplesError(
            f"moment fit needs at least 2 points, got {fset.n}"
        )
    x = fset.values64()
    mean = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1).reshape(fset.d, fset.d)
    cov = (cov + cov.T) / 2.0
    return GaussianFit(mean, cov)


def _sqrt_trace(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    # Tr((A B)^(1/2)) via the symmetric product S = A^(1/2) B A^(1/2):
    # S is similar to A B but Hermitian, so one eigh of S suffices and
    # small negative eigenvalues can be clamped instead of leaking into
    # complex arithmetic.
    w, v = np.linalg.eigh(cov_a)
    root_a = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    s = root_a @ cov_b @ root_a
    s = (s + s.T) / 2.0
    eig = np.clip(np.linalg.eigvalsh(s), 0.0, None)
    return float(np.sqrt(eig).sum())


def fid(a: FeatureSet, b: FeatureSet) -> float:
    """Frechet distance between Gaussian moment fits of the two sets.

    ||mu_a - mu_b||^2 + Tr(C_a + C_b - 2 (C_a C_b)^(1/2)). When d >= n for
    either set the covariance fits are rank deficient, and both get a
    1e-6 ridge before the matrix square root. The result is clamped at
    zero (roundoff can leave it a hair negative).
    """
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    fit_a = fit_gaussian(a)
    fit_b = fit_gaussian(b)
    cov_a, cov_b = fit_a.covariance, fit_b.covariance
    if a.d >= min(a.n, b.n):
        ridge = _COV_EPS * np.eye(a.d)
        cov_a = cov_a + ridge
        cov_b = cov_b + ridge
    diff = fit_a.mean - fit_b.mean
    val = float(diff @ diff) + float(np.trace(cov_a) + np.trace(cov_b)) - 2.0 * _sqrt_trace(cov_a, cov_b)
    return max(val, 0.0)
