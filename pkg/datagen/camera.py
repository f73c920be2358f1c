"""Pinhole camera: intrinsics, look-at extrinsics and projection.

Camera frame convention: the camera looks along its local +z axis, image x
points right and image y points down. `Camera.pose` maps camera coordinates
to world coordinates.
"""
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateLookAt, InvalidGeometry
from .transforms import Pose

Z_NEAR = 0.01
WORLD_UP = np.array([0.0, 0.0, 1.0])


class Projection(NamedTuple):
    u: float
    v: float
    z_cam: float


@dataclass(frozen=True)
class Camera:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: Pose = field(default_factory=Pose)

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidGeometry('focal lengths must be positive')
        if self.width < 1 or self.height < 1:
            raise InvalidGeometry('image size must be positive')
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidGeometry('principal point must lie inside the image')

    @property
    def position(self):
        return np.asarray(self.pose.translation)

    @property
    def forward(self):
        return self.pose.rotation_matrix()[:, 2]

    def world_to_camera(self, points):
        """(N, 3) world points to camera coordinates: R^T (p - t)."""
        rotation = self.pose.rotation_matrix()
        return (np.asarray(points, dtype=np.float64) - self.position) @ rotation

    def resized(self, width, height):
        sx = width / self.width
        sy = height / self.height
        return replace(
            self, fx=self.fx * sx, fy=self.fy * sy, cx=self.cx * sx, cy=self.cy * sy,
            width=int(width), height=int(height),
        )

    def to_dict(self):
        return {
            'fx': self.fx, 'fy': self.fy, 'cx': self.cx, 'cy': self.cy,
            'width': self.width, 'height': self.height, 'pose': self.pose.to_dict(),
        }


def project(camera, world_point):
    """Project one world point. Returns a Projection, or None when the point is behind the near plane."""
    x, y, z = camera.world_to_camera(np.asarray(world_point, dtype=np.float64)[None, :])[0]
    if z <= Z_NEAR:
        return None
    return Projection(camera.fx * x / z + camera.cx, camera.fy * y / z + camera.cy, float(z))


def project_points(camera, points_cam):
    """Vectorized pinhole projection of camera-frame points; callers filter z <= Z_NEAR."""
    z = points_cam[..., 2]
    u = camera.fx * points_cam[..., 0] / z + camera.cx
    v = camera.fy * points_cam[..., 1] / z + camera.cy
    return u, v


def look_at(position, target, up=WORLD_UP):
    """Camera-to-world pose at `position` whose optical axis passes through `target`, zero roll."""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    distance = np.linalg.norm(forward)
    if distance < 1e-12:
        raise DegenerateLookAt('camera position equals target')
    forward /= distance
    right = np.cross(forward, up)
    if np.linalg.norm(right) < 1e-9:
        raise DegenerateLookAt('viewing direction is parallel to world up')
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward], axis=1)
    return Pose.from_matrix(rotation, tuple(position))


def make_camera(position, target, fx, fy, width, height, cx=None, cy=None):
    cx = width / 2.0 if cx is None else cx
    cy = height / 2.0 if cy is None else cy
    return Camera(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height, pose=look_at(position, target))


def spherical_offset(radius, azimuth, elevation):
    return radius * np.array([
        math.cos(elevation) * math.cos(azimuth),
        math.cos(elevation) * math.sin(azimuth),
        math.sin(elevation),
    ])
