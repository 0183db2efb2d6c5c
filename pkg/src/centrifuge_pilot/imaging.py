"""Pixel-level pre-processing primitives.

Images are numpy arrays in one of four layouts:

========  ==================  ===================================================
Gray8     (H, W) uint8        [0, 255]
RGB8      (H, W, 3) uint8     [0, 255] per channel
HSV       (H, W, 3) float64   h in degrees [0, 360), s and v as fractions [0, 1]
Binary    (H, W) uint8        {0, 1}
========  ==================  ===================================================
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import ParameterError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class AnnularMask:
    """Ring of pixels kept around the rotor center; everything else is zeroed."""

    center: tuple
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0 <= self.r_inner < self.r_outer):
            raise ParameterError(f"annulus needs 0 <= r_inner < r_outer, got {self.r_inner}, {self.r_outer}")


@dataclass(frozen=True)
class ClaheParams:
    clip_limit: float = 5.0
    grid: tuple = (8, 8)  # tiles along (x, y)

    def __post_init__(self):
        if not self.clip_limit > 0:
            raise ParameterError("clip_limit must be positive")
        if len(self.grid) != 2 or min(self.grid) < 1:
            raise ParameterError("CLAHE grid dimensions must be >= 1")


def _check_gray(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8 or img.size == 0:
        raise ParameterError("expected a non-empty Gray8 image (H, W) uint8")
    return img


def _check_rgb(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8 or img.size == 0:
        raise ParameterError("expected a non-empty RGB8 image (H, W, 3) uint8")
    return img


def _check_odd(k, minimum):
    if not isinstance(k, (int, np.integer)) or k < minimum or k % 2 == 0:
        raise ParameterError(f"window size must be an odd integer >= {minimum}, got {k!r}")


def to_grayscale(img):
    """BT.601 luma, rounded half up, in exact integer arithmetic."""
    img = _check_rgb(img)
    acc = img[..., 0] * np.int32(299) + img[..., 1] * np.int32(587) + img[..., 2] * np.int32(114)
    return ((acc + 500) // 1000).astype(np.uint8)


def median_blur(img, k=9):
    """k x k median filter with edge replication."""
    img = _check_gray(img)
    _check_odd(k, 3)
    return _kernels.median_u8(np.ascontiguousarray(img), int(k))


def _tile_edges(n, tiles):
    return [i * n // tiles for i in range(tiles + 1)]


def clahe_luts(img, p=ClaheParams()):
    """Per-tile 256-entry mapping tables, shape (tiles_y, tiles_x, 256) uint8."""
    img = _check_gray(img)
    tx, ty = p.grid
    h, w = img.shape
    if tx > w or ty > h:
        raise ParameterError(f"CLAHE grid {p.grid} larger than image {w}x{h}")
    xs = _tile_edges(w, tx)
    ys = _tile_edges(h, ty)
    luts = np.empty((ty, tx, 256), dtype=np.uint8)
    for j in range(ty):
        for i in range(tx):
            tile = img[ys[j]:ys[j + 1], xs[i]:xs[i + 1]]
            n = tile.size
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.float64)
            if math.isfinite(p.clip_limit):
                limit = p.clip_limit * n / 256.0
                excess = np.maximum(hist - limit, 0.0).sum()
                hist = np.minimum(hist, limit) + excess / 256.0
            cdf = np.cumsum(hist)
            luts[j, i] = np.clip(np.floor(255.0 * cdf / n + 0.5), 0, 255)
    return luts


def _interp_axis(n, edges):
    """Lower tile index, upper tile index and weight of the upper one, per pixel."""
    centers = np.array([(edges[t] + edges[t + 1] - 1) / 2.0 for t in range(len(edges) - 1)])
    pos = np.arange(n, dtype=np.float64)
    hi = np.searchsorted(centers, pos, side="right")
    lo = np.clip(hi - 1, 0, len(centers) - 1)
    hi = np.clip(hi, 0, len(centers) - 1)
    span = centers[hi] - centers[lo]
    wt = np.where(span > 0, (pos - centers[lo]) / np.where(span > 0, span, 1.0), 0.0)
    return lo, hi, np.clip(wt, 0.0, 1.0)


def clahe(img, p=ClaheParams()):
    """Contrast-limited adaptive histogram equalization.

    Each tile's histogram is clipped at ``clip_limit`` times the mean bin
    height, the clipped excess is spread evenly over all bins, and the tile's
    CDF becomes its mapping. Pixels blend the four nearest tile mappings
    bilinearly; pixels outside the outermost tile centers clamp to them.
    ``clip_limit=math.inf`` disables clipping.
    """
    img = _check_gray(img)
    luts = clahe_luts(img, p)
    h, w = img.shape
    tx, ty = p.grid
    y0, y1, wy = _interp_axis(h, _tile_edges(h, ty))
    x0, x1, wx = _interp_axis(w, _tile_edges(w, tx))
    return _kernels.clahe_interp(
        np.ascontiguousarray(img), np.ascontiguousarray(luts),
        y0.astype(np.intp), y1.astype(np.intp), np.ascontiguousarray(wy, dtype=np.float64),
        x0.astype(np.intp), x1.astype(np.intp), np.ascontiguousarray(wx, dtype=np.float64),
    )


def dilate(mask, k=5):
    """Binary dilation with a k x k square element."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ParameterError("expected a 2-D binary mask")
    _check_odd(k, 1)
    return ndimage.maximum_filter((mask != 0).astype(np.uint8), size=k, mode="nearest")


def annulus_keep(shape, m):
    """Boolean (H, W) array, True where r_inner <= distance <= r_outer."""
    h, w = shape[:2]
    yy, xx = np.ogrid[:h, :w]
    d2 = (xx - m.center[0]) ** 2 + (yy - m.center[1]) ** 2
    return (d2 >= m.r_inner ** 2) & (d2 <= m.r_outer ** 2)


def apply_annular_mask(img, m):
    img = np.asarray(img)
    keep = annulus_keep(img.shape, m)
    out = np.zeros_like(img)
    out[keep] = img[keep]
    return out


def rgb_to_hsv(img):
    """Hexcone RGB -> HSV with hue in degrees; hue is 0 for gray pixels."""
    img = _check_rgb(img)
    r = img[..., 0].astype(np.float64)
    g = img[..., 1].astype(np.float64)
    b = img[..., 2].astype(np.float64)
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn
    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    h = np.where(mx == r, np.mod((g - b) / safe, 6.0),
                 np.where(mx == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0))
    h *= 60.0
    h[~chroma] = 0.0
    h[h >= 360.0] -= 360.0
    s = np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0)
    out = np.empty(img.shape, dtype=np.float64)
    out[..., 0] = h
    out[..., 1] = s
    out[..., 2] = mx / 255.0
    return out


def hsv_to_rgb(hsv):
    """Inverse of :func:`rgb_to_hsv`, rounded to RGB8."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = v * s
    hp = np.mod(h, 360.0) / 60.0
    x = c * (1.0 - np.abs(np.mod(hp, 2.0) - 1.0))
    sector = np.floor(hp).astype(int) % 6
    zeros = np.zeros_like(c)
    table = [
        (c, x, zeros),
        (x, c, zeros),
        (zeros, c, x),
        (zeros, x, c),
        (x, zeros, c),
        (c, zeros, x),
    ]
    out = np.zeros(hsv.shape, dtype=np.float64)
    for idx, (r1, g1, b1) in enumerate(table):
        sel = sector == idx
        out[..., 0][sel] = r1[sel]
        out[..., 1][sel] = g1[sel]
        out[..., 2][sel] = b1[sel]
    out += (v - c)[..., None]
    return np.clip(np.floor(out * 255.0 + 0.5), 0, 255).astype(np.uint8)
