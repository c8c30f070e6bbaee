"""Reader/writer for the FSET binary feature-set format.

Little-endian layout: magic ``FSET``, version byte (1), space-tag byte
(0 = pixel, 1 = feature, 2 = softmax), reserved u16, row count n (u64),
row dimension d (u64), then n*d float32 values in row-major order.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import AdapterError

MAGIC = b"FSET"
VERSION = 1
HEADER = struct.Struct("<4sBBHQQ")
SPACE_TAGS = {"pixel": 0, "feature": 1, "softmax": 2}
_TAG_NAMES = {v: k for k, v in SPACE_TAGS.items()}


def write_fset(path, rows: np.ndarray, space_tag: str) -> None:
    """Write a 2-D float array as an FSET file."""
    if space_tag not in SPACE_TAGS:
        raise AdapterError(f"unknown space tag {space_tag!r}")
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.size == 0:
        raise AdapterError(f"rows must be a non-empty 2-D array, got shape {rows.shape}")
    if not np.isfinite(rows).all():
        raise AdapterError("rows contain non-finite values")
    n, d = rows.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, SPACE_TAGS[space_tag], 0, n, d))
        fh.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())


def read_fset(path) -> tuple[np.ndarray, str]:
    """Read an FSET file back as (float32 rows, space-tag name)."""
    with open(path, "rb") as fh:
        header = fh.read(HEADER.size)
        if len(header) < HEADER.size:
            raise AdapterError(f"{path}: file shorter than the {HEADER.size}-byte header")
        magic, version, tag, _, n, d = HEADER.unpack(header)
        if magic != MAGIC:
            raise AdapterError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise AdapterError(f"{path}: unsupported version {version}")
        if tag not in _TAG_NAMES:
            raise AdapterError(f"{path}: unknown space tag byte {tag}")
        payload = fh.read()
    expected = n * d * 4
    if len(payload) != expected:
        raise AdapterError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    rows = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    return rows, _TAG_NAMES[tag]
