"""Full pipeline configuration with JSON round-tripping.

Every field has a default, so a config file only needs the values it
overrides. ``CENTRIFUGE_PILOT_CONFIG`` names a fallback config path.
"""

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .hough import HoughParams
from .imaging import AnnularMask, ClaheParams
from .localization import CentrifugeCalibration
from .motion import Feedrates, LatencyModel
from .tubes import DEFAULT_RANGES, HsvRange

ENV_VAR = "CENTRIFUGE_PILOT_CONFIG"


@dataclass(frozen=True)
class PreprocessConfig:
    blur_k: int = 9
    clahe: ClaheParams = field(default_factory=ClaheParams)
    annulus_r_inner: float = 190.0
    annulus_r_outer: float = 320.0

    def __post_init__(self):
        if self.blur_k < 3 or self.blur_k % 2 == 0:
            raise ConfigError("blur_k must be odd and >= 3")
        AnnularMask((0.0, 0.0), self.annulus_r_inner, self.annulus_r_outer)


@dataclass(frozen=True)
class TubeConfig:
    ranges: tuple = DEFAULT_RANGES
    dilate_k: int = 5
    area_lo: float = 500.0
    area_hi: float = 2000.0

    def __post_init__(self):
        if not self.ranges:
            raise ConfigError("at least one colour range is required")
        if not 0 <= self.area_lo < self.area_hi:
            raise ConfigError("area gate needs 0 <= area_lo < area_hi")
        if self.dilate_k < 1 or self.dilate_k % 2 == 0:
            raise ConfigError("dilate_k must be odd")


@dataclass(frozen=True)
class WorldConfig:
    tol_grip: float = 1.5
    tol_insert: float = 4.0
    capture_mm: float = 10.0
    dropoff_xy: tuple = (20.0, 20.0)

    def __post_init__(self):
        if not 0 < self.tol_grip < self.tol_insert:
            raise ConfigError("tolerances need 0 < tol_grip < tol_insert")


@dataclass(frozen=True)
class ExperimentConfig:
    ambient_gain_range: tuple = (0.7, 1.3)
    noise_sigma_range: tuple = (0.0, 6.0)
    hole_radius_range: tuple = (30, 35)
    localization_noise_mm: float = 1.5
    glare_radius_fraction: float = 0.65  # glare sigma relative to the hole radius
    detection_budget_s: float = 15.0


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    hough: HoughParams = field(default_factory=HoughParams)
    tubes: TubeConfig = field(default_factory=TubeConfig)
    calibration: CentrifugeCalibration = field(default_factory=CentrifugeCalibration)
    feeds: Feedrates = field(default_factory=Feedrates)
    latency: LatencyModel = field(default_factory=LatencyModel)
    world: WorldConfig = field(default_factory=WorldConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def __post_init__(self):
        if self.hough.min_dist < 2 * self.hough.r_max + 1:
            raise ConfigError("min_dist must be at least 2*r_max + 1")

    def annulus(self):
        return AnnularMask(
            tuple(self.calibration.rotor_center_px),
            self.preprocess.annulus_r_inner,
            self.preprocess.annulus_r_outer,
        )

    def to_dict(self):
        return _to_plain(self)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def _build(cls, default, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys at {path or 'top level'}: {sorted(unknown)}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        cur = getattr(default, f.name)
        val = data[f.name]
        sub = f"{path}.{f.name}" if path else f.name
        if dataclasses.is_dataclass(cur):
            kwargs[f.name] = _build(type(cur), cur, val, sub)
        elif f.name == "ranges":
            kwargs[f.name] = tuple(HsvRange(**r) for r in val)
        elif isinstance(cur, tuple):
            kwargs[f.name] = tuple(val)
        else:
            kwargs[f.name] = val
    try:
        return dataclasses.replace(default, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


def config_from_dict(data):
    return _build(PipelineConfig, PipelineConfig(), data, "")


def load_config(path=None):
    """Load ``path``, else ``$CENTRIFUGE_PILOT_CONFIG``, else built-in defaults."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return PipelineConfig()
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)

