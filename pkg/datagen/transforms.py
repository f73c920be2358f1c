"""Rigid transforms: unit quaternions (w, x, y, z) and poses."""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidGeometry

IDENTITY_ROTATION = (1.0, 0.0, 0.0, 0.0)


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ], dtype=np.float64)


def matrix_to_quat(m):
    """Rotation matrix to unit quaternion (Shepperd's method), w >= 0."""
    m = np.asarray(m, dtype=np.float64)
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0.0:
        s = math.sqrt(trace + 1.0) * 2.0
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    if w < 0.0:
        q = -q
    q /= np.linalg.norm(q)
    return tuple(float(c) for c in q)


def quat_multiply(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return (
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    )


def yaw_quat(yaw):
    half = 0.5 * yaw
    return (math.cos(half), 0.0, 0.0, math.sin(half))


@dataclass(frozen=True)
class Pose:
    translation: tuple = (0.0, 0.0, 0.0)
    rotation: tuple = IDENTITY_ROTATION

    def __post_init__(self):
        translation = tuple(float(c) for c in self.translation)
        rotation = tuple(float(c) for c in self.rotation)
        if len(translation) != 3 or not all(math.isfinite(c) for c in translation):
            raise InvalidGeometry('pose translation must be 3 finite numbers: {!r}'.format(self.translation))
        if len(rotation) != 4 or abs(math.sqrt(sum(c * c for c in rotation)) - 1.0) > 1e-6:
            raise InvalidGeometry('pose rotation must be a unit quaternion: {!r}'.format(self.rotation))
        object.__setattr__(self, 'translation', translation)
        object.__setattr__(self, 'rotation', rotation)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_yaw(cls, yaw, translation=(0.0, 0.0, 0.0)):
        return cls(translation=translation, rotation=yaw_quat(yaw))

    @classmethod
    def from_matrix(cls, rotation_matrix, translation):
        return cls(translation=translation, rotation=matrix_to_quat(rotation_matrix))

    def rotation_matrix(self):
        return quat_to_matrix(self.rotation)

    def apply(self, points):
        """Transform an (N, 3) array of local points into the parent frame."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation_matrix().T + np.asarray(self.translation)

    def compose(self, other):
        """Pose of `other` (expressed in this pose's frame) in the parent frame."""
        rotation = quat_multiply(self.rotation, other.rotation)
        norm = math.sqrt(sum(c * c for c in rotation))
        translation = self.apply(np.asarray(other.translation)[None, :])[0]
        return Pose(translation=tuple(translation), rotation=tuple(c / norm for c in rotation))

    def to_dict(self):
        return {'translation': list(self.translation), 'rotation': list(self.rotation)}
