"""Deterministic software rasterizer: RGB, instance-id and depth buffers per shot.

All geometry and interpolation runs in float64. Triangles with a vertex at or
behind the near plane are skipped, not clipped. Coverage is inclusive (edge
functions >= 0) and the depth test is strict, so the fixed draw order decides
ties.
"""
from dataclasses import dataclass

import numpy as np

from .camera import Z_NEAR, project_points
from .exceptions import IdOverflow

SKY_COLOR = (180, 200, 230)
MAX_PGM_ID = 65535


@dataclass(frozen=True, eq=False)
class FrameBuffers:
    rgb: np.ndarray
    ids: np.ndarray
    depth: np.ndarray

    @property
    def width(self):
        return self.ids.shape[1]

    @property
    def height(self):
        return self.ids.shape[0]


@dataclass(frozen=True, eq=False)
class DrawItem:
    owner_id: int
    triangles: np.ndarray
    albedo: tuple = None
    background: object = None


def draw_list(scene):
    """Triangle batches in draw order: environment, furniture, then objects by instance id."""
    items = []
    for group, mesh in scene.room.surfaces:
        items.append(DrawItem(0, mesh.triangles(), background=scene.backgrounds[group]))
    for piece, pose in zip(scene.furniture, scene.furniture_poses):
        items.append(DrawItem(0, piece.mesh.triangles(pose), albedo=piece.albedo))
    for instance in sorted(scene.objects, key=lambda o: o.instance_id):
        mesh = scene.classes[instance.class_id].mesh
        items.append(DrawItem(instance.instance_id, mesh.triangles(instance.pose), albedo=instance.albedo))
    return items


def triangle_count(items):
    return sum(len(item.triangles) for item in items)


def quantize(values):
    """[0, 1] floats to uint8, rounding half away from zero."""
    scaled = np.clip(values, 0.0, 1.0) * 255.0
    return (np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)).astype(np.uint8)


def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


class _Rasterizer:
    def __init__(self, camera, light):
        self.camera = camera
        self.camera_position = camera.position
        self.to_light = -np.asarray(light.direction)
        self.intensity = light.intensity
        self.ambient = light.ambient
        self.rgb = np.empty((camera.height, camera.width, 3), dtype=np.uint8)
        self.rgb[:] = SKY_COLOR
        self.ids = np.zeros((camera.height, camera.width), dtype=np.uint32)
        self.depth = np.full((camera.height, camera.width), np.inf, dtype=np.float64)

    def draw(self, item):
        triangles = item.triangles
        if not len(triangles):
            return
        camera = self.camera
        cam = camera.world_to_camera(triangles.reshape(-1, 3)).reshape(-1, 3, 3)
        z = cam[..., 2]
        in_front = np.all(z > Z_NEAR, axis=1)
        with np.errstate(divide='ignore', invalid='ignore'):
            u, v = project_points(camera, cam)
            area = _edge(u[:, 0], v[:, 0], u[:, 1], v[:, 1], u[:, 2], v[:, 2])
            x_lo = np.maximum(np.ceil(u.min(axis=1) - 0.5), 0)
            x_hi = np.minimum(np.floor(u.max(axis=1) - 0.5), camera.width - 1)
            y_lo = np.maximum(np.ceil(v.min(axis=1) - 0.5), 0)
            y_hi = np.minimum(np.floor(v.max(axis=1) - 0.5), camera.height - 1)
            keep = in_front & (area != 0.0) & (x_lo <= x_hi) & (y_lo <= y_hi)
        if not keep.any():
            return

        # 面法線をカメラ側に向けてから Lambert の係数を求める
        normals = np.cross(triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0])
        lengths = np.linalg.norm(normals, axis=1)
        lengths[lengths == 0.0] = 1.0
        normals /= lengths[:, None]
        facing = np.einsum('ij,ij->i', normals, self.camera_position - triangles[:, 0])
        normals[facing < 0.0] *= -1.0
        lambert = np.maximum(0.0, normals @ self.to_light)
        shade = self.ambient + self.intensity * lambert

        flat_color = None
        if item.albedo is not None:
            flat_color = np.asarray(item.albedo)

        for i in np.flatnonzero(keep):
            x0, x1, y0, y1 = int(x_lo[i]), int(x_hi[i]), int(y_lo[i]), int(y_hi[i])
            px = np.arange(x0, x1 + 1, dtype=np.float64)[None, :] + 0.5
            py = np.arange(y0, y1 + 1, dtype=np.float64)[:, None] + 0.5
            (u0, u1, u2), (v0, v1, v2) = u[i], v[i]
            w0 = _edge(u1, v1, u2, v2, px, py)
            w1 = _edge(u2, v2, u0, v0, px, py)
            w2 = _edge(u0, v0, u1, v1, px, py)
            if area[i] < 0.0:
                w0, w1, w2 = -w0, -w1, -w2
            covered = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
            if not covered.any():
                continue
            total = abs(area[i])
            l0, l1, l2 = w0 / total, w1 / total, w2 / total
            z0, z1, z2 = z[i]
            inv_z = l0 / z0 + l1 / z1 + l2 / z2
            depth = 1.0 / inv_z

            depth_view = self.depth[y0:y1 + 1, x0:x1 + 1]
            write = covered & (depth < depth_view)
            if not write.any():
                continue
            depth_view[write] = depth[write]
            self.ids[y0:y1 + 1, x0:x1 + 1][write] = item.owner_id

            rgb_view = self.rgb[y0:y1 + 1, x0:x1 + 1]
            if flat_color is not None:
                rgb_view[write] = quantize(flat_color * shade[i])
            else:
                tri = triangles[i]
                zw = depth[write]
                a0, a1, a2 = l0[write] / z0, l1[write] / z1, l2[write] / z2
                wx = (a0 * tri[0, 0] + a1 * tri[1, 0] + a2 * tri[2, 0]) * zw
                wy = (a0 * tri[0, 1] + a1 * tri[1, 1] + a2 * tri[2, 1]) * zw
                albedo = item.background.color_at(wx, wy)
                rgb_view[write] = quantize(albedo * shade[i])

    def buffers(self):
        return FrameBuffers(rgb=self.rgb, ids=self.ids, depth=self.depth)


def rasterize_items(camera, light, items):
    """Draw `items` in order with one camera and light."""
    rasterizer = _Rasterizer(camera, light)
    for item in items:
        rasterizer.draw(item)
    return rasterizer.buffers()


def rasterize(scene):
    return rasterize_items(scene.camera, scene.light, draw_list(scene))


def encode_ppm(rgb):
    """Binary PPM (P6, maxval 255)."""
    height, width = rgb.shape[:2]
    header = 'P6\n{} {}\n255\n'.format(width, height).encode('ascii')
    return header + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def encode_pgm(ids):
    """Binary PGM (P5, maxval 65535, big-endian samples) of the instance-id buffer."""
    if ids.size and int(ids.max()) > MAX_PGM_ID:
        raise IdOverflow('instance id {} does not fit a 16-bit PGM'.format(int(ids.max())))
    height, width = ids.shape
    header = 'P5\n{} {}\n{}\n'.format(width, height, MAX_PGM_ID).encode('ascii')
    return header + ids.astype('>u2').tobytes()
