"""Deterministic top-down rotor renderer with exact ground truth.

The scene is a light bench, a dark rotor disk with a lighter hub, darker
bucket holes on a ring, and optional coloured tube disks inside the holes.
Glare blends pixels toward white with a Gaussian falloff; ambient gain scales
everything; then seeded luminance noise is added. Noise is SplitMix64 plus
fixed-point Box-Muller, so a spec and seed give the same bytes everywhere.
"""

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .errors import ParameterError
from .prng import MASK64, gaussian_noise
from .localization import CentrifugeCalibration, Tool, centrifuge_position, project_angle, to_gantry

TUBE_RGB = {
    "yellow": (255, 220, 0),
    "orange": (255, 140, 0),
    "red": (220, 30, 30),
    "green": (40, 180, 60),
    "pink": (255, 105, 180),
    "purple": (150, 60, 200),
}

TUBE_RADIUS_FRACTION = 0.6
SUPERSAMPLE = 4

@dataclass(frozen=True)
class Tube:
    color_label: str
    rgb: tuple

    @classmethod
    def named(cls, name):
        try:
            return cls(name, TUBE_RGB[name])
        except KeyError:
            raise ParameterError(f"unknown tube colour {name!r}") from None


@dataclass(frozen=True)
class Glare:
    center_px: tuple
    radius_px: float  # Gaussian sigma of the falloff
    strength: float

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ParameterError("glare strength must be in [0, 1]")
        if self.radius_px <= 0:
            raise ParameterError("glare radius must be positive")


@dataclass(frozen=True)
class SceneSpec:
    width: int = 1280
    height: int = 720
    rotor_center_px: tuple = (640.0, 360.0)
    rotor_disk_radius_px: float = 330.0
    hub_radius_px: float = 70.0
    bucket_ring_radius_px: float = 260.0
    bucket_angles: tuple = (30.0, 210.0)  # degrees, counter-clockwise, image up is +90
    hole_radius_px: float = 32.0
    tubes: tuple = (None, None)
    ambient_gain: float = 1.0
    glare: tuple = ()
    noise_sigma: float = 0.0
    seed: int = 0
    background_rgb: tuple = (200, 200, 200)
    rotor_rgb: tuple = (90, 90, 90)
    hub_rgb: tuple = (150, 150, 150)
    hole_rgb: tuple = (15, 15, 15)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ParameterError("image size must be positive")
        if not 30 <= self.hole_radius_px <= 35:
            raise ParameterError("hole radius must lie in [30, 35] px")
        if len(self.tubes) != len(self.bucket_angles):
            raise ParameterError("one tube entry (or None) per bucket")
        angles = [a % 360.0 for a in self.bucket_angles]
        for i in range(len(angles)):
            for j in range(i + 1, len(angles)):
                sep = abs(angles[i] - angles[j]) % 360.0
                if min(sep, 360.0 - sep) < 60.0:
                    raise ParameterError("buckets must be at least 60 degrees apart")
        if self.bucket_ring_radius_px + self.hole_radius_px > self.rotor_disk_radius_px:
            raise ParameterError("holes must lie inside the rotor disk")
        if self.bucket_ring_radius_px - self.hole_radius_px <= self.hub_radius_px:
            raise ParameterError("holes must not overlap the hub")
        if not 0.4 <= self.ambient_gain <= 1.6:
            raise ParameterError("ambient_gain must be in [0.4, 1.6]")
        if self.noise_sigma < 0:
            raise ParameterError("noise_sigma must be >= 0")
        if not 0 <= self.seed <= MASK64:
            raise ParameterError("seed must be an unsigned 64-bit integer")

    def hole_centers(self):
        calib = CentrifugeCalibration(rotor_center_px=self.rotor_center_px)
        return [project_angle(math.radians(a), self.bucket_ring_radius_px, calib) for a in self.bucket_angles]


def _coverage_box(h, w, center, radius, ss):
    cu, cv = center
    u0 = max(0, int(math.floor(cu - radius - 1)))
    u1 = min(w, int(math.ceil(cu + radius + 2)))
    v0 = max(0, int(math.floor(cv - radius - 1)))
    v1 = min(h, int(math.ceil(cv + radius + 2)))
    if u0 >= u1 or v0 >= v1:
        return None
    vs = np.arange(v0, v1, dtype=np.float64)[:, None]
    us = np.arange(u0, u1, dtype=np.float64)[None, :]
    d = np.sqrt((us - cu) ** 2 + (vs - cv) ** 2)
    box = np.zeros(d.shape, dtype=np.float64)
    box[d <= radius - 0.75] = 1.0
    rim_v, rim_u = np.nonzero(np.abs(d - radius) < 0.75)
    if rim_v.size:
        offs = (np.arange(ss) + 0.5) / ss - 0.5
        sv = (rim_v + v0)[:, None, None] + offs[None, :, None]
        su = (rim_u + u0)[:, None, None] + offs[None, None, :]
        inside = (su - cu) ** 2 + (sv - cv) ** 2 <= radius * radius
        box[rim_v, rim_u] = inside.mean(axis=(1, 2))
    return (slice(v0, v1), slice(u0, u1)), box


def disk_coverage(h, w, center, radius, ss=SUPERSAMPLE):
    """Fraction of each pixel's unit square inside the disk.

    Pixel (u, v) spans [u - 0.5, u + 0.5) x [v - 0.5, v + 0.5). Pixels whose
    square straddles the rim are estimated on an ss x ss subsample grid.
    """
    cov = np.zeros((h, w), dtype=np.float64)
    hit = _coverage_box(h, w, center, radius, ss)
    if hit is not None:
        cov[hit[0]] = hit[1]
    return cov


@dataclass
class GroundTruth:
    circles: list  # (u, v, r) per bucket
    occupied: list
    color_labels: list
    angles_rad: list
    gantry_poses: list  # (x, y) gripper pose per bucket, mm

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(
            [tuple(c) for c in d["circles"]], list(d["occupied"]), list(d["color_labels"]),
            list(d["angles_rad"]), [tuple(p) for p in d["gantry_poses"]],
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def ground_truth(spec, calib=None):
    calib = calib or CentrifugeCalibration(rotor_center_px=spec.rotor_center_px)
    circles, poses, angles = [], [], []
    for a, (u, v) in zip(spec.bucket_angles, spec.hole_centers()):
        theta = math.radians(a)
        angles.append(theta)
        circles.append((u, v, float(spec.hole_radius_px)))
        pose = to_gantry(centrifuge_position(theta, calib), Tool.GRIPPER, calib, "safe")
        poses.append((pose.x, pose.y))
    return GroundTruth(
        circles,
        [t is not None for t in spec.tubes],
        [t.color_label if t is not None else None for t in spec.tubes],
        angles,
        poses,
    )


def render(spec, calib=None):
    """Render ``spec`` to an RGB8 image; returns ``(image, GroundTruth)``."""
    h, w = spec.height, spec.width
    layers = [(spec.rotor_center_px, spec.rotor_disk_radius_px, spec.rotor_rgb),
              (spec.rotor_center_px, spec.hub_radius_px, spec.hub_rgb)]
    for center, tube in zip(spec.hole_centers(), spec.tubes):
        layers.append((center, spec.hole_radius_px, spec.hole_rgb))
        if tube is not None:
            layers.append((center, TUBE_RADIUS_FRACTION * spec.hole_radius_px, tube.rgb))

    # leading gray layers are blended on one channel; per-channel arithmetic
    # is identical, so this only saves time
    def gray(rgb):
        return rgb[0] == rgb[1] == rgb[2]

    n_gray = 0
    if gray(spec.background_rgb):
        while n_gray < len(layers) and gray(layers[n_gray][2]):
            n_gray += 1
    plane = np.full((h, w), float(spec.background_rgb[0]))
    for center, radius, rgb in layers[:n_gray]:
        hit = _coverage_box(h, w, center, radius, SUPERSAMPLE)
        if hit is not None:
            sl, c = hit
            plane[sl] = plane[sl] * (1.0 - c) + float(rgb[0]) * c
    if n_gray:
        img = np.repeat(plane[..., None], 3, axis=2)
    else:
        img = np.empty((h, w, 3), dtype=np.float64)
        img[:] = spec.background_rgb
    for center, radius, rgb in layers[n_gray:]:
        hit = _coverage_box(h, w, center, radius, SUPERSAMPLE)
        if hit is not None:
            sl, c = hit
            img[sl] = img[sl] * (1.0 - c[..., None]) + np.asarray(rgb, dtype=np.float64) * c[..., None]
    if spec.glare:
        yy, xx = np.mgrid[:h, :w].astype(np.float64)
    for g in spec.glare:
        d2 = (xx - g.center_px[0]) ** 2 + (yy - g.center_px[1]) ** 2
        wgt = g.strength * np.exp(-d2 / (2.0 * g.radius_px ** 2))
        img += (255.0 - img) * wgt[..., None]
    img *= spec.ambient_gain
    out = np.floor(img + 0.5).astype(np.int64)
    if spec.noise_sigma > 0:
        out += gaussian_noise(spec.seed, (h, w), spec.noise_sigma)[..., None]
    return np.clip(out, 0, 255).astype(np.uint8), ground_truth(spec, calib)


def spec_to_dict(spec):
    d = asdict(spec)
    d["tubes"] = [None if t is None else {"color_label": t.color_label, "rgb": list(t.rgb)} for t in spec.tubes]
    d["glare"] = [{"center_px": list(g.center_px), "radius_px": g.radius_px, "strength": g.strength} for g in spec.glare]
    return d


def spec_from_dict(d):
    d = dict(d)
    d["tubes"] = tuple(None if t is None else Tube(t["color_label"], tuple(t["rgb"])) for t in d.get("tubes", (None, None)))
    d["glare"] = tuple(Glare(tuple(g["center_px"]), g["radius_px"], g["strength"]) for g in d.get("glare", ()))
    for key in ("rotor_center_px", "bucket_angles", "background_rgb", "rotor_rgb", "hub_rgb", "hole_rgb"):
        if key in d:
            d[key] = tuple(d[key])
    return SceneSpec(**d)
