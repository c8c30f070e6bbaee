"""Directory scanning and image decoding.

Every regular file in the input directory is a candidate row; files that
cannot be decoded as images are skipped (the caller records them). Row
order is lexicographic filename order, so the same directory always
produces the same FSET layout.
"""

from __future__ import annotations

import logging
from pathlib import Path

from PIL import Image

from .errors import InputError

log = logging.getLogger("extractor_adapter")


class DecodeError(Exception):
    """A candidate file could not be decoded as an RGB image."""


def list_candidates(images_dir) -> list[Path]:
    """Return the regular files in the directory, sorted by filename."""
    directory = Path(images_dir)
    try:
        if not directory.is_dir():
            raise InputError(f"{directory} is not a directory")
        entries = sorted(p for p in directory.iterdir() if p.is_file())
    except OSError as exc:
        raise InputError(f"cannot read image directory {directory}: {exc}") from exc
    return entries


def load_rgb(path) -> Image.Image:
    """Decode one file as an RGB image or raise DecodeError."""
    try:
        with Image.open(path) as im:
            return im.convert("RGB")
    except Exception as exc:
        raise DecodeError(f"{exc.__class__.__name__}: {exc}") from exc
