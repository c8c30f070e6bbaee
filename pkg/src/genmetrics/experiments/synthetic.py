"""Synthetic substrates: Gaussian mixtures and toy blob images.

The mixtures stand in for real/generated feature distributions at desk
scale. The blob images exist for the transformation-robustness protocol:
each one is a single Gaussian intensity bump whose support keeps a 5-pixel
border margin, so integer shifts of up to 4 pixels move the blob without
clipping it — this makes the intensity histogram *exactly* shift
invariant, which the robustness sweep relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from genmetrics.errors import ValidationError
from genmetrics.featureset import FeatureSet
from genmetrics.rng import SeededRng

#: blob support never comes closer than this to any image border
BLOB_MARGIN = 5

_RADIUS_LO = 1.5
_RADIUS_HI = 3.0

HISTOGRAM_BINS = 32


@dataclass(frozen=True)
class ToyImage:
    """A single grayscale image; intensities live in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise ValidationError(f"image must be 2-D, got shape {px.shape}")
        if not np.isfinite(px).all():
            raise ValidationError("image intensities must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValidationError("image intensities must lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def shape(self):
        return self.pixels.shape


def generate_gaussian_mixture(means, scales, weights, n: int, rng: SeededRng) -> FeatureSet:
    """n i.i.d. draws from an isotropic Gaussian mixture."""
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    scales = np.asarray(scales, dtype=np.float64).ravel()
    weights = np.asarray(weights, dtype=np.float64).ravel()
    k = means.shape[0]
    if scales.shape != (k,) or weights.shape != (k,):
        raise ValidationError(
            f"means/scales/weights lengths disagree: {k}, {scales.shape[0]}, {weights.shape[0]}"
        )
    if not np.isfinite(means).all() or not np.isfinite(scales).all() or not np.isfinite(weights).all():
        raise ValidationError("mixture parameters must be finite")
    if scales.min() <= 0.0:
        raise ValidationError("component scales must be > 0")
    if weights.min() < 0.0 or abs(weights.sum() - 1.0) > 1e-9:
        raise ValidationError("weights must be non-negative and sum to 1 within 1e-9")
    n = int(n)
    if n < 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    g = rng.generator()
    component = g.choice(k, size=n, p=weights / weights.sum())
    draws = means[component] + g.standard_normal((n, means.shape[1])) * scales[component, None]
    return FeatureSet(draws, "feature")


def generate_toy_images(n: int, h: int, w: int, rng: SeededRng) -> list[ToyImage]:
    """n blob images with seeded interior positions and radii."""
    n, h, w = int(n), int(h), int(w)
    if h < 16 or w < 16:
        raise ValidationError(f"images must be at least 16x16, got {h}x{w}")
    if n < 1:
        raise ValidationError(f"image count must be >= 1, got {n}")
    g = rng.generator()
    # keep the full support radius inside the margin with a little slack,
    # so a <= 4 pixel shift can never push blob mass off the canvas
    r_hi = min(_RADIUS_HI, (min(h, w) - 1) / 2.0 - BLOB_MARGIN - 0.1)
    yy, xx = np.ogrid[0:h, 0:w]
    images = []
    for _ in range(n):
        radius = g.uniform(_RADIUS_LO, r_hi)
        cy = g.uniform(BLOB_MARGIN + radius, (h - 1) - BLOB_MARGIN - radius)
        cx = g.uniform(BLOB_MARGIN + radius, (w - 1) - BLOB_MARGIN - radius)
        dist2 = (yy - cy) ** 2 + (xx - cx) ** 2
        sigma = radius / 2.0
        pixels = np.exp(-dist2 / (2.0 * sigma * sigma))
        pixels[dist2 > radius * radius] = 0.0
        images.append(ToyImage(pixels))
    return images


def _shift_image(pixels: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Integer shift with zero fill (positive dy moves content down)."""
    h, w = pixels.shape
    out = np.zeros_like(pixels)
    ys_src = slice(max(0, -dy), min(h, h - dy))
    xs_src = slice(max(0, -dx), min(w, w - dx))
    ys_dst = slice(max(0, dy), min(h, h + dy))
    xs_dst = slice(max(0, dx), min(w, w + dx))
    out[ys_dst, xs_dst] = pixels[ys_src, xs_src]
    return out


def _rotate_image(pixels: np.ndarray, angle_deg: float) -> np.ndarray:
    if angle_deg == 0.0:
        return pixels.copy()
    out = ndimage.rotate(
        pixels, angle_deg, reshape=False, order=1, mode="constant", cval=0.0, prefilter=False
    )
    return np.clip(out, 0.0, 1.0)


def transform_images(images, max_shift: int, max_angle: float, fraction: float, rng: SeededRng) -> list[ToyImage]:
    """Shift or rotate a seeded fraction of the images.

    Each selected image flips a coin: integer shift uniform on the
    [-max_shift, max_shift]^2 lattice (zero fill), or rotation by an angle
    uniform in [-max_angle, max_angle] degrees (bilinear, zero padding).
    Unselected images pass through unchanged.
    """
    max_shift = int(max_shift)
    max_angle = float(max_angle)
    fraction = float(fraction)
    if max_shift < 0:
        raise ValidationError(f"max_shift must be >= 0, got {max_shift}")
    if max_angle < 0:
        raise ValidationError(f"max_angle must be >= 0, got {max_angle}")
    if not 0.0 <= fraction <= 1.0:
        raise ValidationError(f"fraction must be in [0, 1], got {fraction}")
    count = int(np.rint(fraction * len(images)))
    g = rng.generator()
    chosen = sorted(g.choice(len(images), size=count, replace=False).tolist())
    out = list(images)
    for idx in chosen:
        pixels = images[idx].pixels
        if g.random() < 0.5:
            dy, dx = (int(v) for v in g.integers(-max_shift, max_shift + 1, size=2))
            if (dy, dx) != (0, 0):
                pixels = _shift_image(pixels, dy, dx)
        else:
            angle = float(g.uniform(-max_angle, max_angle))
            pixels = _rotate_image(pixels, angle)
        out[idx] = ToyImage(pixels)
    return out


def toy_feature_map(images, feature_map: str = "pixel") -> FeatureSet:
    """Embed images as points: raw raster scan, or a 32-bin intensity histogram.

    The histogram space is the deliberately transformation-insensitive one:
    an interior integer shift permutes pixel values without changing their
    multiset, so histogram rows are bitwise shift invariant.
    """
    if not images:
        raise ValidationError("toy_feature_map needs at least one image")
    shape = images[0].shape
    if any(img.shape != shape for img in images):
        raise ValidationError("all images must share the same dimensions")
    if feature_map == "pixel":
        rows = np.stack([img.pixels.ravel() for img in images])
        return FeatureSet(rows, "pixel")
    if feature_map == "histogram":
        size = shape[0] * shape[1]
        rows = np.stack(
            [
                np.histogram(img.pixels, bins=HISTOGRAM_BINS, range=(0.0, 1.0))[0] / size
                for img in images
            ]
        )
        return FeatureSet(rows, "feature")
    raise ValidationError(f"unknown feature map {feature_map!r}; expected 'pixel' or 'histogram'")
