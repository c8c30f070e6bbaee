"""Tests for mixture sampling, toy images, and their transformations."""

import numpy as np
import pytest

from genmetrics import SeededRng, ValidationError
from genmetrics.experiments import (
    BLOB_MARGIN,
    HISTOGRAM_BINS,
    ToyImage,
    generate_gaussian_mixture,
    generate_toy_images,
    toy_feature_map,
    transform_images,
)
from genmetrics.experiments.synthetic import _rotate_image, _shift_image


# ---------------------------------------------------------------- mixtures


def test_mixture_shapes_and_tag():
    fset = generate_gaussian_mixture([[0.0, 0.0]], [1.0], [1.0], 17, SeededRng(5))
    assert fset.n == 17 and fset.d == 2
    assert fset.space_tag == "feature"


def test_mixture_deterministic():
    args = ([[0.0] * 3, [4.0] * 3], [1.0, 0.5], [0.5, 0.5], 64)
    a = generate_gaussian_mixture(*args, SeededRng(9))
    b = generate_gaussian_mixture(*args, SeededRng(9))
    assert a == b
    c = generate_gaussian_mixture(*args, SeededRng(10))
    assert a != c


def test_single_component_mean_within_clt_band():
    n, scale = 50_000, 1.5
    mean = np.array([2.0, -1.0, 0.5, 0.0])
    fset = generate_gaussian_mixture([mean], [scale], [1.0], n, SeededRng(123))
    empirical = fset.values64().mean(axis=0)
    band = 3.0 * scale / np.sqrt(n)
    assert np.all(np.abs(empirical - mean) <= band)


def test_component_counts_within_multinomial_band():
    n = 10_000
    weights = np.array([0.3, 0.7])
    means = [[0.0], [100.0]]
    fset = generate_gaussian_mixture(means, [1.0, 1.0], weights, n, SeededRng(7))
    counts = np.array(
        [(fset.values64()[:, 0] < 50.0).sum(), (fset.values64()[:, 0] >= 50.0).sum()]
    )
    sigma = np.sqrt(n * weights * (1.0 - weights))
    assert np.all(np.abs(counts - n * weights) <= 4.0 * sigma)


@pytest.mark.parametrize(
    "means,scales,weights",
    [
        ([[0.0]], [1.0, 2.0], [1.0]),  # length mismatch
        ([[0.0]], [0.0], [1.0]),  # non-positive scale
        ([[0.0], [1.0]], [1.0, 1.0], [0.6, 0.6]),  # weights sum != 1
        ([[0.0], [1.0]], [1.0, 1.0], [-0.1, 1.1]),  # negative weight
        ([[np.inf]], [1.0], [1.0]),  # non-finite mean
    ],
)
def test_mixture_rejects_bad_parameters(means, scales, weights):
    with pytest.raises(ValidationError):
        generate_gaussian_mixture(means, scales, weights, 4, SeededRng(0))


def test_mixture_rejects_bad_count():
    with pytest.raises(ValidationError):
        generate_gaussian_mixture([[0.0]], [1.0], [1.0], 0, SeededRng(0))


# -------------------------------------------------------------- toy images


def test_toy_image_validation():
    with pytest.raises(ValidationError):
        ToyImage(np.full((4, 4), 1.5))
    with pytest.raises(ValidationError):
        ToyImage(np.full((4, 4), -0.1))
    with pytest.raises(ValidationError):
        ToyImage(np.zeros(16))
    nan = np.zeros((4, 4))
    nan[0, 0] = np.nan
    with pytest.raises(ValidationError):
        ToyImage(nan)


def test_generate_toy_images_rejects_small_canvas():
    with pytest.raises(ValidationError):
        generate_toy_images(3, 15, 16, SeededRng(0))
    with pytest.raises(ValidationError):
        generate_toy_images(3, 16, 8, SeededRng(0))
    with pytest.raises(ValidationError):
        generate_toy_images(0, 16, 16, SeededRng(0))


def test_toy_images_respect_margin_and_range():
    images = generate_toy_images(60, 16, 20, SeededRng(31))
    assert len(images) == 60
    for img in images:
        px = img.pixels
        assert px.shape == (16, 20)
        assert px.min() >= 0.0 and px.max() <= 1.0
        rows, cols = np.nonzero(px)
        assert rows.size > 0
        assert rows.min() >= BLOB_MARGIN and rows.max() <= 16 - 1 - BLOB_MARGIN
        assert cols.min() >= BLOB_MARGIN and cols.max() <= 20 - 1 - BLOB_MARGIN
        total = px.sum()
        cy = (np.arange(16)[:, None] * px).sum() / total
        cx = (np.arange(20)[None, :] * px).sum() / total
        assert BLOB_MARGIN <= cy <= 15 - BLOB_MARGIN
        assert BLOB_MARGIN <= cx <= 19 - BLOB_MARGIN


def test_toy_images_deterministic():
    a = generate_toy_images(8, 16, 16, SeededRng(77))
    b = generate_toy_images(8, 16, 16, SeededRng(77))
    assert all(np.array_equal(x.pixels, y.pixels) for x, y in zip(a, b))


# ------------------------------------------------------------- transforms


def test_shift_moves_argmax_exactly():
    img = generate_toy_images(1, 16, 16, SeededRng(4))[0]
    shifted = _shift_image(img.pixels, 2, 0)
    before = np.unravel_index(img.pixels.argmax(), img.pixels.shape)
    after = np.unravel_index(shifted.argmax(), shifted.shape)
    assert after == (before[0] + 2, before[1])
    shifted = _shift_image(img.pixels, -3, 4)
    after = np.unravel_index(shifted.argmax(), shifted.shape)
    assert after == (before[0] - 3, before[1] + 4)


def test_shift_preserves_value_multiset_for_interior_blob():
    img = generate_toy_images(1, 16, 16, SeededRng(11))[0]
    shifted = _shift_image(img.pixels, 4, -4)
    assert np.array_equal(np.sort(img.pixels.ravel()), np.sort(shifted.ravel()))


def test_rotation_stays_in_range_and_zero_angle_is_identity():
    img = generate_toy_images(1, 16, 16, SeededRng(2))[0]
    rotated = _rotate_image(img.pixels, 13.5)
    assert rotated.min() >= 0.0 and rotated.max() <= 1.0
    assert not np.array_equal(rotated, img.pixels)
    assert np.array_equal(_rotate_image(img.pixels, 0.0), img.pixels)


def test_transform_fraction_zero_is_identity():
    images = generate_toy_images(10, 16, 16, SeededRng(6))
    out = transform_images(images, 4, 15.0, 0.0, SeededRng(1))
    assert all(np.array_equal(a.pixels, b.pixels) for a, b in zip(images, out))


def test_transform_selects_rounded_count():
    images = generate_toy_images(25, 16, 16, SeededRng(6))
    out = transform_images(images, 4, 15.0, 0.5, SeededRng(3))
    changed = sum(
        1 for a, b in zip(images, out) if not np.array_equal(a.pixels, b.pixels)
    )
    # round-half-even: 0.5 * 25 -> 12 selected (identity draws are possible
    # in principle, but this seed changes every selected image)
    assert changed == 12


def test_transform_full_fraction_changes_only_by_bounded_shift_or_rotation():
    images = generate_toy_images(20, 16, 16, SeededRng(15))
    out = transform_images(images, 4, 0.0, 1.0, SeededRng(8))
    for a, b in zip(images, out):
        # max_angle=0 makes every transform an integer shift; the blob is
        # interior so the value multiset is exactly preserved
        assert np.array_equal(np.sort(a.pixels.ravel()), np.sort(b.pixels.ravel()))
        da = np.unravel_index(a.pixels.argmax(), a.pixels.shape)
        db = np.unravel_index(b.pixels.argmax(), b.pixels.shape)
        assert abs(da[0] - db[0]) <= 4 and abs(da[1] - db[1]) <= 4


def test_transform_deterministic():
    images = generate_toy_images(12, 16, 16, SeededRng(21))
    a = transform_images(images, 4, 15.0, 0.75, SeededRng(5))
    b = transform_images(images, 4, 15.0, 0.75, SeededRng(5))
    assert all(np.array_equal(x.pixels, y.pixels) for x, y in zip(a, b))


def test_transform_rejects_bad_arguments():
    images = generate_toy_images(3, 16, 16, SeededRng(0))
    with pytest.raises(ValidationError):
        transform_images(images, -1, 15.0, 0.5, SeededRng(0))
    with pytest.raises(ValidationError):
        transform_images(images, 4, -2.0, 0.5, SeededRng(0))
    with pytest.raises(ValidationError):
        transform_images(images, 4, 15.0, 1.5, SeededRng(0))


# ------------------------------------------------------------ feature maps


def test_pixel_map_unrolls_rasters():
    images = generate_toy_images(5, 16, 20, SeededRng(9))
    fset = toy_feature_map(images, "pixel")
    assert fset.space_tag == "pixel"
    assert fset.n == 5 and fset.d == 320
    assert np.array_equal(fset.data[2], images[2].pixels.ravel())


def test_histogram_map_rows_sum_to_one():
    images = generate_toy_images(6, 16, 16, SeededRng(13))
    fset = toy_feature_map(images, "histogram")
    assert fset.space_tag == "feature"
    assert fset.n == 6 and fset.d == HISTOGRAM_BINS
    assert np.all(np.abs(fset.data.sum(axis=1) - 1.0) <= 1e-9)


def test_histogram_exactly_shift_invariant():
    img = generate_toy_images(1, 16, 16, SeededRng(17))[0]
    shifted = ToyImage(_shift_image(img.pixels, 3, -2))
    a = toy_feature_map([img], "histogram")
    b = toy_feature_map([shifted], "histogram")
    assert np.array_equal(a.data, b.data)


def test_feature_map_rejects_bad_input():
    images = generate_toy_images(2, 16, 16, SeededRng(1))
    with pytest.raises(ValidationError):
        toy_feature_map(images, "wavelet")
    with pytest.raises(ValidationError):
        toy_feature_map([], "pixel")
    mixed = images + generate_toy_images(1, 16, 20, SeededRng(2))
    with pytest.raises(ValidationError):
        toy_feature_map(mixed, "pixel")
