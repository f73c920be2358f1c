"""Reference implementations the renderer is checked against.

These take a different route from the rasterizer on purpose: a 4x4
homogeneous view matrix for projection and per-pixel Moller-Trumbore ray
casting for visibility. Keep them independent of render.py.
"""
import numpy as np

from .camera import Z_NEAR


def view_matrix(camera):
    """4x4 world-to-camera matrix."""
    rotation = camera.pose.rotation_matrix()
    position = np.asarray(camera.pose.translation)
    view = np.eye(4)
    view[:3, :3] = rotation.T
    view[:3, 3] = -rotation.T @ position
    return view


def intrinsic_matrix(camera):
    return np.array([
        [camera.fx, 0.0, camera.cx, 0.0],
        [0.0, camera.fy, camera.cy, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])


def project_homogeneous(camera, world_point):
    """(u, v, z_cam) through K @ V on homogeneous coordinates; None when behind the near plane."""
    p = np.append(np.asarray(world_point, dtype=np.float64), 1.0)
    cam = view_matrix(camera) @ p
    if cam[2] <= Z_NEAR:
        return None
    pixel = intrinsic_matrix(camera) @ cam
    return pixel[0] / pixel[2], pixel[1] / pixel[2], cam[2]


def visible_triangles(camera, triangles, owners):
    """Drop triangles with any corner at or behind the near plane (the renderer skips those)."""
    triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
    owners = np.asarray(owners)
    homogeneous = np.concatenate([triangles, np.ones(triangles.shape[:2] + (1,))], axis=2)
    z = (homogeneous @ view_matrix(camera).T)[..., 2]
    keep = np.all(z > Z_NEAR, axis=1)
    return triangles[keep], owners[keep]


def raycast(camera, triangles, owners):
    """Nearest-hit id and depth buffers by casting one ray through every pixel centre.

    Depth is the camera-frame z of the hit; ties keep the earlier triangle.
    """
    height, width = camera.height, camera.width
    xs = (np.arange(width) + 0.5 - camera.cx) / camera.fx
    ys = (np.arange(height) + 0.5 - camera.cy) / camera.fy
    gx, gy = np.meshgrid(xs, ys)
    directions_cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1).reshape(-1, 3)
    rotation = camera.pose.rotation_matrix()
    directions = directions_cam @ rotation.T
    origin = np.asarray(camera.pose.translation)

    depth = np.full(width * height, np.inf)
    ids = np.zeros(width * height, dtype=np.uint32)
    for tri, owner in zip(triangles, owners):
        v0, v1, v2 = tri
        e1 = v1 - v0
        e2 = v2 - v0
        h = np.cross(directions, e2)
        a = h @ e1
        valid = np.abs(a) > 1e-14
        f = np.zeros_like(a)
        f[valid] = 1.0 / a[valid]
        s = origin - v0
        bu = f * (h @ s)
        q = np.cross(s, e1)
        bv = f * (directions @ q)
        t = f * (e2 @ q)
        hit = valid & (bu >= 0.0) & (bv >= 0.0) & (bu + bv <= 1.0) & (t > Z_NEAR) & (t < depth)
        depth[hit] = t[hit]
        ids[hit] = owner
    return ids.reshape(height, width), depth.reshape(height, width)


def scene_visibility(scene, draw_items):
    """Ray-cast buffers for a scene given its draw batches."""
    triangles = [item.triangles for item in draw_items if len(item.triangles)]
    owners = [np.full(len(item.triangles), item.owner_id) for item in draw_items if len(item.triangles)]
    if not triangles:
        empty = np.zeros((scene.camera.height, scene.camera.width), dtype=np.uint32)
        return empty, np.full(empty.shape, np.inf)
    tris, own = visible_triangles(scene.camera, np.concatenate(triangles), np.concatenate(owners))
    return raycast(scene.camera, tris, own)


def per_instance_hit_depths(camera, triangles, owners):
    """{owner: depth buffer} of each owner's nearest hit, for occlusion-consistency checks."""
    result = {}
    for owner in sorted(set(int(o) for o in owners) - {0}):
        mask = np.asarray(owners) == owner
        _, depth = raycast(camera, np.asarray(triangles)[mask], np.asarray(owners)[mask])
        result[owner] = depth
    return result
