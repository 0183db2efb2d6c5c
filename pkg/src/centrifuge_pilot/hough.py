"""Sobel gradients, Canny edges and the gradient-method circle Hough transform."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ParameterError


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray

    @property
    def magnitude(self):
        """L1 magnitude |gx| + |gy| as int32."""
        return (np.abs(self.gx) + np.abs(self.gy)).astype(np.int32)

    @property
    def direction(self):
        return np.arctan2(self.gy, self.gx)


@dataclass(frozen=True)
class CannyParams:
    low_threshold: int = 20
    high_threshold: int = 120

    def __post_init__(self):
        if not (0 <= self.low_threshold < self.high_threshold):
            raise ParameterError("Canny thresholds need 0 <= low < high")


@dataclass(frozen=True)
class HoughParams:
    dp: float = 1.5
    min_dist: float = 200.0
    r_min: int = 30
    r_max: int = 35
    acc_threshold: int = 25
    canny: CannyParams = field(default_factory=CannyParams)

    def __post_init__(self):
        if self.dp < 1:
            raise ParameterError("dp must be >= 1")
        if not (0 < self.r_min <= self.r_max):
            raise ParameterError("radius band needs 0 < r_min <= r_max")
        if int(self.r_min) != self.r_min or int(self.r_max) != self.r_max:
            raise ParameterError("radius bounds are whole pixels")
        if self.min_dist <= 0:
            raise ParameterError("min_dist must be positive")
        if self.acc_threshold < 1:
            raise ParameterError("acc_threshold must be >= 1")


@dataclass(frozen=True)
class Circle:
    center: tuple  # (u, v) full-resolution pixels
    radius: float
    score: int


def sobel(img):
    """3x3 Sobel responses on an edge-replicated Gray8 image."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ParameterError("sobel expects a Gray8 image")
    p = np.pad(img.astype(np.int32), 1, mode="edge")
    h, w = img.shape

    def s(dy, dx):
        return p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    gx = (s(-1, 1) + 2 * s(0, 1) + s(1, 1)) - (s(-1, -1) + 2 * s(0, -1) + s(1, -1))
    gy = (s(1, -1) + 2 * s(1, 0) + s(1, 1)) - (s(-1, -1) + 2 * s(-1, 0) + s(-1, 1))
    return GradientField(np.ascontiguousarray(gx, dtype=np.int32), np.ascontiguousarray(gy, dtype=np.int32))


def _canny_from_gradient(grad, p):
    return _kernels.nms_hysteresis(grad.magnitude, grad.gx, grad.gy, int(p.low_threshold), int(p.high_threshold))


def canny(img, p=CannyParams()):
    """Binary edge map. No internal smoothing; the one-pixel image border never
    carries edges."""
    return _canny_from_gradient(sobel(img), p)


def accumulator_shape(width, height, dp):
    """Cells per axis; cell (i, j) represents full-resolution point (i*dp, j*dp)."""
    return int((height - 1) // dp) + 1, int((width - 1) // dp) + 1


@dataclass
class HoughVotes:
    """Intermediate products of one transform, kept for debugging and oracles."""

    edges: np.ndarray
    gradient: GradientField
    accumulator: np.ndarray
    dp: float


def hough_votes(img, p=HoughParams()):
    img = np.asarray(img)
    if img.ndim != 2:
        raise ParameterError("hough_circles expects a Gray8 image")
    grad = sobel(img)
    edges = _canny_from_gradient(grad, p.canny)
    ys, xs = np.nonzero(edges)
    gx = grad.gx[ys, xs].astype(np.float64)
    gy = grad.gy[ys, xs].astype(np.float64)
    norm = np.sqrt(gx * gx + gy * gy)
    ok = norm > 0
    xs, ys, gx, gy, norm = xs[ok], ys[ok], gx[ok], gy[ok], norm[ok]
    acc_h, acc_w = accumulator_shape(img.shape[1], img.shape[0], p.dp)
    acc = _kernels.hough_vote(
        np.ascontiguousarray(xs, dtype=np.int64), np.ascontiguousarray(ys, dtype=np.int64),
        np.ascontiguousarray(gx / norm), np.ascontiguousarray(gy / norm),
        acc_h, acc_w, float(p.dp), int(p.r_min), int(p.r_max),
    )
    return HoughVotes(edges, grad, acc, p.dp)


def local_maxima(acc, threshold):
    """Cells >= threshold that beat all 8 neighbours.

    Equal-vote neighbours are resolved toward the lexicographically smallest
    (row, column) cell.
    """
    a = acc.astype(np.int64)
    pad = np.pad(a, 1, constant_values=-1)
    h, w = a.shape
    ok = a >= threshold
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nb = pad[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            if (dy, dx) < (0, 0):
                ok &= a > nb
            else:
                ok &= a >= nb
    js, is_ = np.nonzero(ok)
    votes = a[js, is_]
    order = np.lexsort((is_, js, -votes))
    return [(int(js[k]), int(is_[k]), int(votes[k])) for k in order]


def estimate_radius(center, xs, ys, r_min, r_max):
    """Mode of rounded edge distances within [r_min, r_max]; ties go to the
    smaller radius. None when nothing supports the center."""
    d = np.sqrt((xs - center[0]) ** 2 + (ys - center[1]) ** 2)
    bins = np.floor(d + 0.5).astype(np.int64)
    bins = bins[(bins >= r_min) & (bins <= r_max)]
    if bins.size == 0:
        return None
    counts = np.bincount(bins - r_min, minlength=r_max - r_min + 1)
    return int(np.argmax(counts)) + r_min


def circles_from_votes(votes, p=HoughParams()):
    ys, xs = np.nonzero(votes.edges)
    xs = xs.astype(np.float64)
    ys = ys.astype(np.float64)
    accepted = []
    min_d2 = float(p.min_dist) ** 2
    for j, i, score in local_maxima(votes.accumulator, p.acc_threshold):
        center = (i * p.dp, j * p.dp)
        if any((center[0] - c.center[0]) ** 2 + (center[1] - c.center[1]) ** 2 < min_d2 for c in accepted):
            continue
        radius = estimate_radius(center, xs, ys, p.r_min, p.r_max)
        if radius is None:
            continue
        accepted.append(Circle(center, float(radius), score))
    return accepted


def hough_circles(img, p=HoughParams()):
    """Detect circles with radius in [r_min, r_max]; strongest first."""
    return circles_from_votes(hough_votes(img, p), p)
