"""Image pixel -> rotor angle -> centrifuge frame -> gantry frame.

Only the direction from the rotor center to a detection is used; its
distance comes from the known bucket ring radius in millimetres. Image rows
grow downward, so the row offset is negated to get a right-handed y-up frame.
"""

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError, DegenerateInputError, OutOfWorkspaceError


class Tool(str, enum.Enum):
    CAMERA = "camera"
    GRIPPER = "gripper"


@dataclass(frozen=True)
class CentrifugeCalibration:
    rotor_center_px: tuple = (640.0, 360.0)
    bucket_ring_radius_mm: float = 95.0
    rotor_center_gantry_mm: tuple = (150.0, 150.0)
    safe_z: float = 80.0
    grip_z: float = 50.0
    insert_z: float = 55.0
    camera_z: float = 100.0
    camera_offset_mm: tuple = (-35.0, 0.0)  # camera position relative to the gripper
    workspace_min: tuple = (0.0, 0.0, 0.0)
    workspace_max: tuple = (300.0, 300.0, 150.0)

    def __post_init__(self):
        if not self.bucket_ring_radius_mm > 0:
            raise ConfigError("bucket_ring_radius_mm must be positive")
        if not self.grip_z < self.safe_z:
            raise ConfigError("grip_z must be below safe_z")
        if not self.insert_z < self.safe_z:
            raise ConfigError("insert_z must be below safe_z")
        if any(lo >= hi for lo, hi in zip(self.workspace_min, self.workspace_max)):
            raise ConfigError("workspace box is empty")

    def z_level(self, name):
        try:
            return {"safe": self.safe_z, "grip": self.grip_z, "insert": self.insert_z, "camera": self.camera_z}[name]
        except KeyError:
            raise ConfigError(f"unknown z level {name!r}") from None

    def in_workspace(self, x, y, z):
        return all(lo <= c <= hi for c, lo, hi in zip((x, y, z), self.workspace_min, self.workspace_max))


@dataclass(frozen=True)
class WorldPose:
    x: float
    y: float
    z: float
    a: float = 0.0  # end-effector rotation about the gantry x axis, degrees


def image_angle(center_px, calib):
    du = center_px[0] - calib.rotor_center_px[0]
    dv = center_px[1] - calib.rotor_center_px[1]
    if du == 0 and dv == 0:
        raise DegenerateInputError("detection coincides with the rotor center")
    return math.atan2(-dv, du)


def centrifuge_position(theta, calib):
    r = calib.bucket_ring_radius_mm
    return (r * math.cos(theta), r * math.sin(theta))


def to_gantry(pt, tool, calib, z_level="safe"):
    """Centrifuge-frame point -> gantry pose for ``tool``.

    Detections are made through the camera, so a gripper pose is shifted by
    minus the camera offset.
    """
    x = pt[0] + calib.rotor_center_gantry_mm[0]
    y = pt[1] + calib.rotor_center_gantry_mm[1]
    if Tool(tool) is Tool.GRIPPER:
        x -= calib.camera_offset_mm[0]
        y -= calib.camera_offset_mm[1]
    z = calib.z_level(z_level)
    if not calib.in_workspace(x, y, z):
        raise OutOfWorkspaceError(f"pose ({x:.2f}, {y:.2f}, {z:.2f}) outside workspace")
    return WorldPose(x, y, z, 0.0)


def localize(center_px, calib, tool=Tool.GRIPPER, z_level="safe"):
    """Full chain for one detected circle center."""
    return to_gantry(centrifuge_position(image_angle(center_px, calib), calib), tool, calib, z_level)


def project_angle(theta, ring_radius_px, calib):
    """Pixel position of a bucket at rotor angle ``theta``; inverse of :func:`image_angle`."""
    return (
        calib.rotor_center_px[0] + ring_radius_px * math.cos(theta),
        calib.rotor_center_px[1] - ring_radius_px * math.sin(theta),
    )
