"""Point-set data model, deterministic sampling, and the feature-file format.

A FeatureSet holds n points placed in R^d by some feature map; it is the
empirical stand-in for a distribution. Sets are immutable by convention:
operations return new instances and never write through to their inputs.

Files use the FSET layout (little-endian, 24-byte header):

    bytes 0-3    magic "FSET"
    byte  4      format version, currently 1
    byte  5      space tag: 0=pixel, 1=feature, 2=softmax
    bytes 6-7    reserved, must be zero
    bytes 8-15   point count n, unsigned 64-bit
    bytes 16-23  dimension d, unsigned 64-bit
    payload      n*d IEEE-754 float32 values, row-major

Paths ending in ``.csv`` load as headerless comma-separated text instead,
one point per row, tagged "feature".

Payloads are stored in 32-bit precision; every distance computation in this
module promotes to float64 first. Distances are computed per coordinate
pair in a fixed order (never via the expanded dot-product identity), so
identical rows give an exact 0 and swapping the arguments transposes the
matrix bit-for-bit.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from genmetrics.errors import (
    DimensionError,
    FormatError,
    InsufficientSamplesError,
    TruncationError,
    ValidationError,
)
from genmetrics.rng import SeededRng

SPACE_TAGS = ("pixel", "feature", "softmax")

SOFTMAX_ROW_SUM_TOL = 1e-5

_MAGIC = b"FSET"
_VERSION = 1
_HEADER = struct.Struct("<4sBBHQQ")  # magic, version, tag, reserved, n, d
_TAG_TO_CODE = {"pixel": 0, "feature": 1, "softmax": 2}
_CODE_TO_TAG = {v: k for k, v in _TAG_TO_CODE.items()}


def _check_payload(data: np.ndarray, space_tag: str) -> None:
    if not np.isfinite(data).all():
        raise ValidationError("feature values must be finite (no NaN or infinity)")
    if space_tag == "softmax":
        if data.min() < 0.0:
            raise ValidationError("softmax rows must be non-negative")
        sums = data.sum(axis=1, dtype=np.float64)
        worst = float(np.abs(sums - 1.0).max())
        if worst > SOFTMAX_ROW_SUM_TOL:
            raise ValidationError(
                f"softmax rows must sum to 1 within {SOFTMAX_ROW_SUM_TOL}; "
                f"worst deviation {worst:.3g}"
            )


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """n points in R^d plus the tag of the space they live in.

    ``data`` is kept in float32 or float64 exactly as supplied (other
    dtypes are promoted to float64). Arithmetic on sets always upcasts to
    float64; see :func:`pairwise_distances`.
    """

    data: np.ndarray
    space_tag: str = "feature"
    name: str = ""

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValidationError(f"feature data must be 2-D (n, d), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"feature data needs n >= 1 and d >= 1, got shape {arr.shape}")
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        else:
            # own the buffer: callers keep their arrays, we freeze ours
            arr = np.array(arr, order="C", copy=True)
        if self.space_tag not in SPACE_TAGS:
            raise ValidationError(f"unknown space tag {self.space_tag!r}; expected one of {SPACE_TAGS}")
        _check_payload(arr, self.space_tag)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def values64(self) -> np.ndarray:
        """Payload promoted to float64 for computation."""
        return self.data.astype(np.float64, copy=False)

    def __eq__(self, other):
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return self.space_tag == other.space_tag and np.array_equal(self.data, other.data)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"FeatureSet(n={self.n}, d={self.d}, space={self.space_tag!r}{label})"


@dataclass(frozen=True)
class DistanceMatrix:
    """Euclidean distances between two sets: values[i, j] = d(a_i, b_j)."""

    values: np.ndarray
    left_n: int = field(default=-1)
    right_m: int = field(default=-1)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValidationError(f"distance matrix must be 2-D, got shape {vals.shape}")
        if self.left_n == -1:
            object.__setattr__(self, "left_n", vals.shape[0])
        if self.right_m == -1:
            object.__setattr__(self, "right_m", vals.shape[1])
        if vals.shape != (self.left_n, self.right_m):
            raise ValidationError(
                f"distance matrix shape {vals.shape} does not match ({self.left_n}, {self.right_m})"
            )
        if not np.isfinite(vals).all():
            raise ValidationError("distances must be finite")
        if vals.min() < 0.0:
            raise ValidationError("distances must be non-negative")
        object.__setattr__(self, "values", vals)


def euclidean_matrix(a: FeatureSet, b: FeatureSet) -> np.ndarray:
    """Raw float64 distance array; the workhorse behind pairwise_distances.

    Single-threaded with a fixed per-entry accumulation order, so results
    are bit-identical run to run.
    """
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    return cdist(a.values64(), b.values64(), metric="euclidean")


def pairwise_distances(a: FeatureSet, b: FeatureSet) -> DistanceMatrix:
    """All-pairs Euclidean distances between two sets in the same space."""
    return DistanceMatrix(euclidean_matrix(a, b))


def load_feature_file(path) -> FeatureSet:
    """Read a feature file (FSET binary, or CSV when the path ends in .csv)."""
    path = os.fspath(path)
    name = os.path.splitext(os.path.basename(path))[0]
    if path.lower().endswith(".csv"):
        return _load_csv(path, name)
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncationError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, version, tag_code, reserved, n, d = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if tag_code not in _CODE_TO_TAG:
        raise FormatError(f"{path}: unknown space tag code {tag_code}")
    if reserved != 0:
        raise FormatError(f"{path}: reserved header bytes must be zero")
    expected = n * d * 4
    actual = len(raw) - _HEADER.size
    if actual != expected:
        raise TruncationError(
            f"{path}: header declares {n} x {d} points ({expected} payload bytes), "
            f"file holds {actual}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    return FeatureSet(data.copy(), _CODE_TO_TAG[tag_code], name=name)


def _load_csv(path: str, name: str) -> FeatureSet:
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except OSError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: cannot parse CSV payload ({exc})") from exc
    return FeatureSet(data, "feature", name=name)


def write_feature_file(fset: FeatureSet, path) -> None:
    """Write an FSET binary file; payload is float32 little-endian.

    The payload is re-validated first so a set whose buffer was mutated
    after construction cannot produce a corrupt file: nothing is written
    on failure.
    """
    path = os.fspath(path)
    _check_payload(fset.data, fset.space_tag)
    header = _HEADER.pack(_MAGIC, _VERSION, _TAG_TO_CODE[fset.space_tag], 0, fset.n, fset.d)
    payload = np.ascontiguousarray(fset.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def seeded_split(fset: FeatureSet, sizes, rng: SeededRng) -> list[FeatureSet]:
    """Disjoint random subsets with the requested sizes, sampled without replacement.

    A single permutation of the rows is drawn and cut into consecutive
    blocks, so the parts never overlap. sizes=[n] returns one set that is a
    row permutation of the input.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValidationError("seeded_split needs at least one requested size")
    if any(s < 1 for s in sizes):
        raise ValidationError(f"split sizes must be >= 1, got {sizes}")
    total = sum(sizes)
    if total > fset.n:
        raise InsufficientSamplesError(
            f"cannot split {fset.n} points into parts totalling {total}"
        )
    perm = rng.generator().permutation(fset.n)
    parts = []
    start = 0
    for s in sizes:
        idx = perm[start : start + s]
        parts.append(FeatureSet(fset.data[idx].copy(), fset.space_tag, name=fset.name))
        start += s
    return parts


def mix_sets(real: FeatureSet, other: FeatureSet, t: float, n_out: int, rng: SeededRng) -> FeatureSet:
    """Blend two pools: a fraction ``t`` of the output comes from ``other``.

    Draws round(t * n_out) rows from ``other`` (round half to even) and the
    remainder from ``real``, both without replacement, then shuffles the
    result. Deterministic given the rng.
    """
    if real.d != other.d:
        raise DimensionError(f"dimension mismatch: {real.d} vs {other.d}")
    if real.space_tag != other.space_tag:
        raise ValidationError(
            f"cannot mix sets from different spaces: {real.space_tag!r} vs {other.space_tag!r}"
        )
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"mixing fraction must be in [0, 1], got {t}")
    n_out = int(n_out)
    if n_out < 1:
        raise ValidationError(f"output size must be >= 1, got {n_out}")
    k_other = int(np.rint(t * n_out))
    k_real = n_out - k_other
    if k_other > other.n:
        raise InsufficientSamplesError(
            f"mix needs {k_other} rows from the second pool, it has {other.n}"
        )
    if k_real > real.n:
        raise InsufficientSamplesError(
            f"mix needs {k_real} rows from the first pool, it has {real.n}"
        )
    g = rng.generator()
    idx_real = g.choice(real.n, size=k_real, replace=False)
    idx_other = g.choice(other.n, size=k_other, replace=False)
    rows = np.concatenate([real.data[idx_real], other.data[idx_other]], axis=0)
    rows = rows[g.permutation(n_out)]
    return FeatureSet(rows.copy(), real.space_tag, name=real.name)
