"""Bucket occupancy from color masks, contours and the detected circles."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConsistencyError, ParameterError
from .imaging import annulus_keep, dilate


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV box. Hue wraps through 0 when ``h_lo > h_hi``."""

    label: str
    h_lo: float
    h_hi: float
    s_lo: float = 0.0
    s_hi: float = 1.0
    v_lo: float = 0.0
    v_hi: float = 1.0

    def __post_init__(self):
        if self.s_lo > self.s_hi or self.v_lo > self.v_hi:
            raise ParameterError(f"range {self.label!r}: lower bound above upper bound")

    def contains(self, hsv):
        h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
        if self.h_lo <= self.h_hi:
            hue = (h >= self.h_lo) & (h <= self.h_hi)
        else:
            hue = (h >= self.h_lo) | (h <= self.h_hi)
        return hue & (s >= self.s_lo) & (s <= self.s_hi) & (v >= self.v_lo) & (v <= self.v_hi)


# Blue (165..270 deg) and desaturated grays fall outside every range.
DEFAULT_RANGES = (
    HsvRange("warm", 345.0, 70.0, s_lo=0.35, v_lo=0.2),
    HsvRange("green", 70.0, 165.0, s_lo=0.35, v_lo=0.2),
    HsvRange("magenta", 270.0, 345.0, s_lo=0.25, v_lo=0.2),
)

# tube colour names used by the scene generator -> the range that should catch them
COLOR_CLASSES = {
    "red": "warm",
    "orange": "warm",
    "yellow": "warm",
    "green": "green",
    "pink": "magenta",
    "purple": "magenta",
}


@dataclass(frozen=True)
class Contour:
    boundary: np.ndarray  # (N, 2) int (u, v), closed under 8-connectivity
    area: float
    bbox: tuple  # (u_min, v_min, u_max, v_max), inclusive
    color_label: Optional[str] = None

    @property
    def bbox_center(self):
        u0, v0, u1, v1 = self.bbox
        return ((u0 + u1) / 2.0, (v0 + v1) / 2.0)


@dataclass(frozen=True)
class BucketObservation:
    circle: object
    color_label: Optional[str] = None  # None means the bucket is empty
    matched_contour: Optional[Contour] = None

    @property
    def occupied(self):
        return self.color_label is not None


def shoelace_area(points):
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def build_color_masks(hsv, ranges=DEFAULT_RANGES, annulus=None, dilate_k=5):
    """One dilated binary mask per range, restricted to the annulus."""
    if not ranges:
        raise ParameterError("at least one HSV range is required")
    hsv = np.asarray(hsv)
    keep = annulus_keep(hsv.shape, annulus) if annulus is not None else np.ones(hsv.shape[:2], dtype=bool)
    masks = []
    for r in ranges:
        raw = (r.contains(hsv) & keep).astype(np.uint8)
        masks.append(dilate(raw, dilate_k) if dilate_k > 1 else raw)
    return masks


def color_masks_from_rgb(rgb, ranges=DEFAULT_RANGES, annulus=None, dilate_k=5):
    """Same masks as ``build_color_masks(rgb_to_hsv(rgb), ...)`` in one fused pass."""
    if not ranges:
        raise ParameterError("at least one HSV range is required")
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if annulus is not None:
        keep = annulus_keep(rgb.shape, annulus).astype(np.uint8)
    else:
        keep = np.ones(rgb.shape[:2], dtype=np.uint8)
    bounds = np.array([[r.h_lo, r.h_hi, r.s_lo, r.s_hi, r.v_lo, r.v_hi] for r in ranges], dtype=np.float64)
    raw = _kernels.hsv_range_masks(rgb, bounds, keep)
    return [dilate(m, dilate_k) if dilate_k > 1 else m for m in raw]


def find_contours(mask, label=None):
    """Outermost 8-connected borders in raster order of their first pixel."""
    mask = np.ascontiguousarray(np.asarray(mask) != 0, dtype=np.uint8)
    out = []
    for pts in _kernels.outer_borders(mask):
        u0, v0 = pts.min(axis=0)
        u1, v1 = pts.max(axis=0)
        out.append(Contour(pts, shoelace_area(pts), (int(u0), int(v0), int(u1), int(v1)), label))
    return out


def _contour_key(c):
    cx, cy = c.bbox_center
    return (-c.area, cy, cx, c.color_label or "")


def classify_buckets(circles, contours, area_lo=500.0, area_hi=2000.0):
    """One observation per circle, in input order.

    Contours strictly inside (area_lo, area_hi) whose bbox center falls in a
    circle (boundary inclusive) mark it occupied; the largest such contour wins.
    """
    accepted = sorted((c for c in contours if area_lo < c.area < area_hi), key=_contour_key)
    matches = [[] for _ in circles]
    for c in accepted:
        cx, cy = c.bbox_center
        hits = [
            k for k, circ in enumerate(circles)
            if (cx - circ.center[0]) ** 2 + (cy - circ.center[1]) ** 2 <= circ.radius ** 2
        ]
        if len(hits) > 1:
            raise ConsistencyError("contour center lies inside two circles; min_dist too small for radius band")
        for k in hits:
            matches[k].append(c)
    obs = []
    for circ, found in zip(circles, matches):
        if found:
            best = found[0]  # already ordered largest-first
            obs.append(BucketObservation(circ, best.color_label, best))
        else:
            obs.append(BucketObservation(circ))
    return obs
