"""End-to-end bucket detection, occupancy identification and localization."""

from dataclasses import dataclass, field

import numpy as np

from . import imaging
from .errors import OutOfWorkspaceError
from .hough import circles_from_votes, hough_votes
from .localization import Tool, localize
from .tubes import Contour, classify_buckets, color_masks_from_rgb, find_contours


@dataclass
class DetectionResult:
    observations: list
    poses: list  # gripper WorldPose per observation, None if outside the workspace
    contours: list = field(default_factory=list)
    votes: object = None
    preprocessed: object = None

    @property
    def tubes_identified(self):
        return sum(o.occupied for o in self.observations)


def preprocess(rgb, config):
    """Gray -> median blur -> CLAHE -> annulus."""
    p = config.preprocess
    gray = imaging.to_grayscale(rgb)
    gray = imaging.median_blur(gray, p.blur_k)
    gray = imaging.clahe(gray, p.clahe)
    return imaging.apply_annular_mask(gray, config.annulus())


def _annulus_window(shape, annulus, margin):
    h, w = shape[:2]
    cu, cv = annulus.center
    r = annulus.r_outer + margin
    u0 = max(0, int(np.floor(cu - r)))
    v0 = max(0, int(np.floor(cv - r)))
    u1 = min(w, int(np.ceil(cu + r)) + 1)
    v1 = min(h, int(np.ceil(cv + r)) + 1)
    return u0, v0, u1, v1


def color_contours(rgb, config):
    """Contours of every colour mask, in (mask order, raster order).

    Only the annulus bounding box (plus the dilation reach) is converted;
    masks are empty everywhere else.
    """
    t = config.tubes
    ann = config.annulus()
    u0, v0, u1, v1 = _annulus_window(rgb.shape, ann, t.dilate_k // 2 + 2)
    if u0 >= u1 or v0 >= v1:
        return []
    local = imaging.AnnularMask((ann.center[0] - u0, ann.center[1] - v0), ann.r_inner, ann.r_outer)
    contours = []
    for rng, mask in zip(t.ranges, color_masks_from_rgb(rgb[v0:v1, u0:u1], t.ranges, local, t.dilate_k)):
        for c in find_contours(mask, rng.label):
            contours.append(Contour(
                c.boundary + np.array([u0, v0]), c.area,
                (c.bbox[0] + u0, c.bbox[1] + v0, c.bbox[2] + u0, c.bbox[3] + v0), c.color_label,
            ))
    return contours


def detect(rgb, config):
    """Run the full vision chain on one RGB8 frame."""
    pre = preprocess(rgb, config)
    votes = hough_votes(pre, config.hough)
    circles = circles_from_votes(votes, config.hough)
    contours = color_contours(rgb, config)
    t = config.tubes
    observations = classify_buckets(circles, contours, t.area_lo, t.area_hi)
    poses = []
    for obs in observations:
        try:
            poses.append(localize(obs.circle.center, config.calibration, Tool.GRIPPER, "safe"))
        except (OutOfWorkspaceError, ValueError):
            poses.append(None)
    return DetectionResult(observations, poses, contours, votes, pre)


# ---------------------------------------------------------------- drawing

def _put(img, us, vs, color):
    h, w = img.shape[:2]
    ok = (us >= 0) & (vs >= 0) & (us < w) & (vs < h)
    img[vs[ok], us[ok]] = color


def draw_circle(img, center, radius, color):
    t = np.linspace(0.0, 2.0 * np.pi, max(16, int(2 * np.pi * radius * 2)), endpoint=False)
    us = np.floor(center[0] + radius * np.cos(t) + 0.5).astype(int)
    vs = np.floor(center[1] + radius * np.sin(t) + 0.5).astype(int)
    _put(img, us, vs, color)


def draw_rect(img, bbox, color):
    u0, v0, u1, v1 = bbox
    us = np.arange(u0, u1 + 1)
    vs = np.arange(v0, v1 + 1)
    _put(img, us, np.full_like(us, v0), color)
    _put(img, us, np.full_like(us, v1), color)
    _put(img, np.full_like(vs, u0), vs, color)
    _put(img, np.full_like(vs, u1), vs, color)


def draw_cross(img, center, size, color):
    u = int(np.floor(center[0] + 0.5))
    v = int(np.floor(center[1] + 0.5))
    d = np.arange(-size, size + 1)
    _put(img, u + d, np.full_like(d, v), color)
    _put(img, np.full_like(d, u), v + d, color)


def annotate(rgb, result, config):
    """Detected circles with centers in green, accepted contour boxes in red
    with their centers in blue."""
    out = np.array(rgb, copy=True)
    t = config.tubes
    for c in result.contours:
        if t.area_lo < c.area < t.area_hi:
            draw_rect(out, c.bbox, (255, 0, 0))
            draw_cross(out, c.bbox_center, 4, (0, 0, 255))
    for obs in result.observations:
        draw_circle(out, obs.circle.center, obs.circle.radius, (0, 255, 0))
        draw_cross(out, obs.circle.center, 6, (0, 255, 0))
    return out


def accumulator_image(votes):
    """Accumulator scaled to Gray8 for inspection."""
    acc = votes.accumulator.astype(np.float64)
    peak = acc.max()
    if peak <= 0:
        return np.zeros(acc.shape, dtype=np.uint8)
    return np.floor(acc * 255.0 / peak + 0.5).astype(np.uint8)
