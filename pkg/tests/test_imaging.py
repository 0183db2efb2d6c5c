import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from centrifuge_pilot import imaging
from centrifuge_pilot.errors import ParameterError
from centrifuge_pilot.imaging import AnnularMask, ClaheParams

from .oracles import dilate_oracle, luma_oracle, median_oracle

gray_images = hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=24))


def rgb(*px):
    return np.array([[px]], dtype=np.uint8).reshape(1, 1, 3)


# ---------------------------------------------------------------- grayscale

@pytest.mark.parametrize("px, expected", [((255, 255, 255), 255), ((0, 0, 0), 0), ((255, 0, 0), 76)])
def test_grayscale_examples(px, expected):
    assert imaging.to_grayscale(rgb(*px))[0, 0] == expected


def test_grayscale_matches_exact_rounding():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (40, 40, 3), dtype=np.uint8)
    out = imaging.to_grayscale(img)
    for y, x in itertools.product(range(0, 40, 3), range(40)):
        assert out[y, x] == luma_oracle(*map(int, img[y, x]))


def test_grayscale_rejects_gray_input():
    with pytest.raises(ParameterError):
        imaging.to_grayscale(np.zeros((4, 4), np.uint8))


# ---------------------------------------------------------------- median

def test_median_constant_image(backend):
    img = np.full((20, 30), 77, np.uint8)
    assert np.array_equal(imaging.median_blur(img, 9), img)


def test_median_removes_impulse(backend):
    img = np.zeros((32, 32), np.uint8)
    img[16, 16] = 255
    assert not imaging.median_blur(img, 9).any()


def test_median_random_16x16_matches_sorted_window(backend):
    img = np.random.default_rng(7).integers(0, 256, (16, 16), dtype=np.uint8)
    assert np.array_equal(imaging.median_blur(img, 9), median_oracle(img, 9))


@pytest.mark.parametrize("k", [0, -3, 1, 4, 8, 2.0])
def test_median_bad_window(k):
    with pytest.raises(ParameterError):
        imaging.median_blur(np.zeros((5, 5), np.uint8), k)


@given(gray_images, st.sampled_from([3, 5]))
def test_median_oracle_and_bounds(img, k):
    out = imaging.median_blur(img, k)
    assert np.array_equal(out, median_oracle(img, k))
    assert out.min() >= img.min() and out.max() <= img.max()


# ---------------------------------------------------------------- CLAHE

def global_equalize(img):
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    lut = np.floor(255.0 * cdf / img.size + 0.5).astype(np.uint8)
    return lut[img]


def test_clahe_single_tile_unclipped_is_global_equalization():
    img = np.random.default_rng(3).integers(0, 256, (37, 53), dtype=np.uint8)
    out = imaging.clahe(img, ClaheParams(math.inf, (1, 1)))
    assert np.array_equal(out, global_equalize(img))


def test_clahe_two_populations():
    img = np.full((16, 16), 50, np.uint8)
    img[:, 8:] = 200
    out = imaging.clahe(img, ClaheParams(math.inf, (1, 1)))
    # equalization formula: half the pixels are <= 50, all are <= 200
    assert out[0, 0] == 128 and out[0, 15] == 255


@given(gray_images.filter(lambda a: min(a.shape) >= 4), st.floats(0.5, 20), st.integers(1, 4), st.integers(1, 4))
def test_clahe_luts_monotone_and_range(img, clip, tx, ty):
    p = ClaheParams(clip, (tx, ty))
    luts = imaging.clahe_luts(img, p)
    assert luts.shape == (ty, tx, 256)
    assert (np.diff(luts.astype(int), axis=-1) >= 0).all()
    out = imaging.clahe(img, p)
    assert out.dtype == np.uint8 and out.shape == img.shape


def test_clahe_tile_counts_clip_redistribution():
    # one tile, all pixels one value: the clipped excess spreads over all bins
    img = np.full((16, 16), 100, np.uint8)
    lut = imaging.clahe_luts(img, ClaheParams(2.0, (1, 1)))[0, 0]
    n = 256.0
    limit = 2.0 * n / 256.0
    per_bin = (n - limit) / 256.0
    assert lut[0] == math.floor(255.0 * per_bin / n + 0.5)
    assert lut[255] == 255
    assert lut[100] == math.floor(255.0 * (101 * per_bin + limit) / n + 0.5)


def test_clahe_interpolates_between_tiles():
    img = np.zeros((32, 32), np.uint8)
    img[:, 16:] = 255
    out = imaging.clahe(img, ClaheParams(math.inf, (2, 1)))
    # interior columns between tile centers blend the two mappings
    row = out[0].astype(int)
    assert (np.diff(row[:16]) >= 0).all() or (np.diff(row[:16]) <= 0).all()


def test_clahe_params_validation():
    with pytest.raises(ParameterError):
        ClaheParams(0)
    with pytest.raises(ParameterError):
        ClaheParams(5.0, (0, 8))
    with pytest.raises(ParameterError):
        imaging.clahe(np.zeros((4, 4), np.uint8), ClaheParams(5.0, (8, 8)))


def test_clahe_backends_agree():
    from centrifuge_pilot import _kernels
    img = np.random.default_rng(5).integers(0, 256, (90, 130), dtype=np.uint8)
    outs = []
    for mod in _kernels.available_backends().values():
        old = _kernels.backend
        _kernels.backend = mod
        try:
            outs.append(imaging.clahe(img))
        finally:
            _kernels.backend = old
    assert all(np.array_equal(outs[0], o) for o in outs)


# ---------------------------------------------------------------- dilate

def test_dilate_examples():
    assert not imaging.dilate(np.zeros((9, 9), np.uint8), 5).any()
    m = np.zeros((11, 11), np.uint8)
    m[5, 5] = 1
    out = imaging.dilate(m, 5)
    assert out.sum() == 25 and out[3:8, 3:8].all()
    assert imaging.dilate(np.ones((6, 7), np.uint8), 5).all()


@pytest.mark.parametrize("k", [2, 4, 0])
def test_dilate_even_k(k):
    with pytest.raises(ParameterError):
        imaging.dilate(np.zeros((5, 5), np.uint8), k)


@given(hnp.arrays(np.uint8, st.tuples(st.integers(1, 16), st.integers(1, 16)), elements=st.integers(0, 1)),
       st.sampled_from([1, 3, 5]))
def test_dilate_matches_oracle_and_grows(mask, k):
    out = imaging.dilate(mask, k)
    assert np.array_equal(out, dilate_oracle(mask, k))
    twice = imaging.dilate(out, k)
    assert (twice >= out).all() and (out >= mask).all()


# ---------------------------------------------------------------- annulus

def test_annulus_examples():
    m = AnnularMask((20.0, 20.0), 5.0, 15.0)
    img = np.full((41, 41), 9, np.uint8)
    out = imaging.apply_annular_mask(img, m)
    assert out[20, 20] == 0
    assert out[20, 30] == 9  # d = 10
    assert out[20, 36] == 0  # d = 16 = r_outer + 1
    assert out[20, 35] == 9  # d = r_outer, boundary kept
    assert out[20, 25] == 9  # d = r_inner, boundary kept


def test_annulus_idempotent_and_rgb():
    m = AnnularMask((8.0, 6.0), 2.0, 6.0)
    img = np.random.default_rng(0).integers(0, 256, (12, 16, 3), dtype=np.uint8)
    once = imaging.apply_annular_mask(img, m)
    assert np.array_equal(imaging.apply_annular_mask(once, m), once)
    assert once.shape == img.shape


def test_annulus_validation():
    with pytest.raises(ParameterError):
        AnnularMask((0, 0), 5, 5)
    with pytest.raises(ParameterError):
        AnnularMask((0, 0), -1, 5)


# ---------------------------------------------------------------- HSV

@pytest.mark.parametrize("px, expected", [
    ((255, 0, 0), (0.0, 1.0, 1.0)),
    ((0, 255, 0), (120.0, 1.0, 1.0)),
    ((0, 0, 255), (240.0, 1.0, 1.0)),
    ((128, 128, 128), (0.0, 0.0, 128 / 255)),
])
def test_hsv_examples(px, expected):
    h, s, v = imaging.rgb_to_hsv(rgb(*px))[0, 0]
    assert h == pytest.approx(expected[0]) and s == pytest.approx(expected[1]) and v == pytest.approx(expected[2])
    assert round(v, 3) == round(expected[2], 3)


def test_hsv_round_trip_corners_and_random():
    levels = [0, 128, 255]
    corners = np.array(list(itertools.product(levels, repeat=3)), dtype=np.uint8)
    rand = np.random.default_rng(11).integers(0, 256, (1000, 3), dtype=np.uint8)
    px = np.concatenate([corners, rand])[:, None, :]
    back = imaging.hsv_to_rgb(imaging.rgb_to_hsv(px))
    assert np.abs(back.astype(int) - px.astype(int)).max() <= 1


def test_hsv_range_of_values():
    img = np.random.default_rng(2).integers(0, 256, (30, 30, 3), dtype=np.uint8)
    hsv = imaging.rgb_to_hsv(img)
    assert (hsv[..., 0] >= 0).all() and (hsv[..., 0] < 360).all()
    assert (hsv[..., 1:] >= 0).all() and (hsv[..., 1:] <= 1).all()
