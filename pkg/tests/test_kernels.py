"""Both kernel backends must agree bit for bit on every kernel."""

import numpy as np
import pytest

from centrifuge_pilot import _kernels, imaging
from centrifuge_pilot.hough import accumulator_shape, sobel
from centrifuge_pilot.tubes import DEFAULT_RANGES

backends = _kernels.available_backends()
needs_both = pytest.mark.skipif("compiled" not in backends, reason="compiled extension not built")


def both(name, *args):
    return [getattr(m, name)(*args) for m in (backends["python"], backends["compiled"])]


def test_python_backend_always_available():
    assert "python" in backends
    assert _kernels.BACKEND_NAME in backends


@needs_both
@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("k", [3, 5, 9])
def test_median(seed, k):
    rng = np.random.default_rng(seed)
    img = rng.integers(0, 256, (int(rng.integers(1, 40)), int(rng.integers(1, 40))), dtype=np.uint8)
    a, b = both("median_u8", img, k)
    assert np.array_equal(a, b)


@needs_both
@pytest.mark.parametrize("seed", range(5))
def test_nms_hysteresis(seed):
    rng = np.random.default_rng(seed)
    img = (rng.random((60, 70)) * 60).astype(np.uint8)
    img[20:40, 25:50] += 150
    g = sobel(img)
    a, b = both("nms_hysteresis", np.ascontiguousarray(g.magnitude), g.gx, g.gy, 20, 120)
    assert np.array_equal(a, b)


@needs_both
@pytest.mark.parametrize("seed", range(5))
def test_hough_vote(seed):
    rng = np.random.default_rng(seed)
    n = 400
    xs = rng.integers(0, 200, n).astype(np.int64)
    ys = rng.integers(0, 150, n).astype(np.int64)
    ang = rng.random(n) * 2 * np.pi
    h, w = accumulator_shape(200, 150, 1.5)
    a, b = both("hough_vote", xs, ys, np.cos(ang), np.sin(ang), h, w, 1.5, 30, 35)
    assert a.dtype == b.dtype and np.array_equal(a, b)
    assert a.sum() > 0


@needs_both
@pytest.mark.parametrize("seed", range(10))
def test_outer_borders(seed):
    rng = np.random.default_rng(seed)
    mask = (rng.random((int(rng.integers(1, 33)), int(rng.integers(1, 33)))) < 0.5).astype(np.uint8)
    a, b = both("outer_borders", mask)
    assert len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


@needs_both
@pytest.mark.parametrize("tiles", [(1, 1), (3, 2), (8, 8)])
def test_clahe_interp(tiles):
    img = np.random.default_rng(1).integers(0, 256, (64, 96), dtype=np.uint8)
    p = imaging.ClaheParams(2.0, tiles)
    luts = imaging.clahe_luts(img, p)
    y0, y1, wy = imaging._interp_axis(64, imaging._tile_edges(64, tiles[1]))
    x0, x1, wx = imaging._interp_axis(96, imaging._tile_edges(96, tiles[0]))
    args = (img, luts, y0.astype(np.intp), y1.astype(np.intp), wy, x0.astype(np.intp), x1.astype(np.intp), wx)
    a, b = both("clahe_interp", *args)
    assert np.array_equal(a, b)


@needs_both
@pytest.mark.parametrize("seed", range(5))
def test_hsv_range_masks(seed):
    rng = np.random.default_rng(seed)
    rgb = rng.integers(0, 256, (40, 50, 3), dtype=np.uint8)
    rgb[::2, ::3, 2] = rgb[::2, ::3, 1]
    rgb[5] = 128  # grays
    keep = (rng.random((40, 50)) < 0.8).astype(np.uint8)
    bounds = np.array([[r.h_lo, r.h_hi, r.s_lo, r.s_hi, r.v_lo, r.v_hi] for r in DEFAULT_RANGES])
    a, b = both("hsv_range_masks", rgb, bounds, keep)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_pure_env_var_selects_fallback():
    import subprocess
    import sys
    code = "from centrifuge_pilot import _kernels; print(_kernels.BACKEND_NAME)"
    out = subprocess.run([sys.executable, "-c", code], env={"CENTRIFUGE_PILOT_PURE": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
