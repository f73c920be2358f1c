"""Triangle meshes: OBJ-subset parsing and export, primitives and bounds."""
import io
import logging
import math
import re
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateFace,
    EmptyMesh,
    IndexOutOfRange,
    InvalidGeometry,
    MalformedNumber,
    NonPositiveExtent,
)
from .transforms import Pose

logger = logging.getLogger(__name__)

_FLOAT_RE = re.compile(r'^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$')
_INDEX_RE = re.compile(r'^\d+$')


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    name: str
    vertices: np.ndarray
    faces: np.ndarray
    normals: np.ndarray = None

    def __post_init__(self):
        vertices = _frozen(self.vertices, np.float64).reshape(-1, 3)
        faces = _frozen(self.faces, np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(vertices)):
            raise InvalidGeometry('{}: vertex coordinates must be finite'.format(self.name))
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise InvalidGeometry('{}: face index outside vertex range'.format(self.name))
        object.__setattr__(self, 'vertices', vertices)
        object.__setattr__(self, 'faces', faces)
        if self.normals is not None:
            normals = _frozen(self.normals, np.float64).reshape(-1, 3)
            if len(normals) != len(vertices):
                raise InvalidGeometry('{}: normal count must equal vertex count'.format(self.name))
            if np.any(np.abs(np.linalg.norm(normals, axis=1) - 1.0) > 1e-4):
                raise InvalidGeometry('{}: normals must be unit length'.format(self.name))
            object.__setattr__(self, 'normals', normals)

    @property
    def triangle_count(self):
        return len(self.faces)

    def triangles(self, pose=None):
        """(M, 3, 3) array of face corner positions, optionally posed."""
        vertices = self.vertices if pose is None else pose.apply(self.vertices)
        return vertices[self.faces]


@dataclass(frozen=True)
class Aabb:
    min: tuple
    max: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in self.min)
        hi = tuple(float(c) for c in self.max)
        if any(a > b for a, b in zip(lo, hi)):
            raise InvalidGeometry('aabb min must not exceed max: {} > {}'.format(lo, hi))
        object.__setattr__(self, 'min', lo)
        object.__setattr__(self, 'max', hi)

    @property
    def extents(self):
        return tuple(b - a for a, b in zip(self.min, self.max))

    def translated(self, offset):
        return Aabb(
            tuple(a + o for a, o in zip(self.min, offset)),
            tuple(b + o for b, o in zip(self.max, offset)),
        )

    def intersects(self, other):
        # 接している箱も重なりとみなす
        return all(
            a_lo <= b_hi and b_lo <= a_hi
            for a_lo, a_hi, b_lo, b_hi in zip(self.min, self.max, other.min, other.max)
        )

    def footprint_inside(self, rect):
        x_min, y_min, x_max, y_max = rect
        return (
            self.min[0] >= x_min and self.max[0] <= x_max
            and self.min[1] >= y_min and self.max[1] <= y_max
        )


def compute_aabb(mesh, pose=None):
    points = mesh.vertices if pose is None else pose.apply(mesh.vertices)
    return Aabb(tuple(points.min(axis=0)), tuple(points.max(axis=0)))


def _parse_float(token, line_no):
    if not _FLOAT_RE.match(token):
        raise MalformedNumber('not a decimal number: {!r}'.format(token), line=line_no)
    return float(token)


def _parse_index(token, count, kind, line_no):
    if not _INDEX_RE.match(token):
        raise MalformedNumber('bad {} index: {!r}'.format(kind, token), line=line_no)
    index = int(token)
    if index < 1 or index > count:
        raise IndexOutOfRange(
            '{} index {} outside 1..{}'.format(kind, index, count), line=line_no
        )
    return index - 1


def parse_obj(text, name='mesh'):
    """Parse the Wavefront OBJ subset (v, vn, f) into a TriangleMesh.

    `text` is a string or a text stream. Polygons are fan-triangulated
    around their first corner; everything but v/vn/f lines is ignored.
    """
    if isinstance(text, str):
        text = io.StringIO(text)

    vertices = []
    normals = []
    polygons = []
    for line_no, raw in enumerate(text, start=1):
        tokens = raw.split('#', 1)[0].split()
        if not tokens:
            continue
        kind = tokens[0]
        if kind in ('v', 'vn'):
            if len(tokens) < 4:
                raise MalformedNumber('{} needs 3 coordinates'.format(kind), line=line_no)
            xyz = [_parse_float(t, line_no) for t in tokens[1:4]]
            (vertices if kind == 'v' else normals).append(xyz)
        elif kind == 'f':
            corners = [t.split('/') for t in tokens[1:]]
            if len(corners) < 3:
                raise DegenerateFace(
                    'face has {} vertices, need at least 3'.format(len(corners)), line=line_no
                )
            polygons.append((line_no, corners))

    # 面のインデックスは全頂点を読んでから検証する
    faces = []
    vertex_normal = [None] * len(vertices)
    for line_no, corners in polygons:
        indices = []
        for parts in corners:
            v = _parse_index(parts[0], len(vertices), 'vertex', line_no)
            if len(parts) >= 3 and parts[2]:
                n = _parse_index(parts[2], len(normals), 'normal', line_no)
                if vertex_normal[v] is None:
                    vertex_normal[v] = n
            indices.append(v)
        for i in range(2, len(indices)):
            faces.append((indices[0], indices[i - 1], indices[i]))

    if not faces:
        raise EmptyMesh('{}: no faces'.format(name))

    mesh_normals = None
    if normals and all(n is not None for n in vertex_normal):
        picked = np.array([normals[n] for n in vertex_normal], dtype=np.float64)
        lengths = np.linalg.norm(picked, axis=1)
        if np.all(lengths > 0.0):
            mesh_normals = picked / lengths[:, None]

    mesh = TriangleMesh(name=name, vertices=vertices, faces=faces, normals=mesh_normals)
    logger.debug('parsed %s: %d vertices, %d triangles', name, len(vertices), len(faces))
    return mesh


def load_obj(path, name=None):
    # newline=None で CRLF も LF として読む
    with open(path, 'r', encoding='utf-8', newline=None) as f:
        return parse_obj(f, name=name or str(path))


def dump_obj(mesh):
    """Serialize a mesh back to the OBJ subset read by parse_obj."""
    lines = ['# {}'.format(mesh.name)]
    for x, y, z in mesh.vertices:
        lines.append('v {!r} {!r} {!r}'.format(float(x), float(y), float(z)))
    if mesh.normals is not None:
        for x, y, z in mesh.normals:
            lines.append('vn {!r} {!r} {!r}'.format(float(x), float(y), float(z)))
        for a, b, c in mesh.faces + 1:
            lines.append('f {0}//{0} {1}//{1} {2}//{2}'.format(a, b, c))
    else:
        for a, b, c in mesh.faces + 1:
            lines.append('f {} {} {}'.format(a, b, c))
    return '\n'.join(lines) + '\n'


def _check_extents(values):
    for value in values:
        if not (math.isfinite(value) and value > 0.0):
            raise NonPositiveExtent('extent must be positive: {!r}'.format(value))


def make_box(extents, name='box'):
    """Axis-aligned box centred on the origin, wound so face normals point outward."""
    ex, ey, ez = (float(e) for e in extents)
    _check_extents((ex, ey, ez))
    hx, hy, hz = ex / 2.0, ey / 2.0, ez / 2.0
    vertices = [
        (-hx, -hy, -hz), (hx, -hy, -hz), (hx, hy, -hz), (-hx, hy, -hz),
        (-hx, -hy, hz), (hx, -hy, hz), (hx, hy, hz), (-hx, hy, hz),
    ]
    faces = [
        (0, 2, 1), (0, 3, 2),  # -z
        (4, 5, 6), (4, 6, 7),  # +z
        (0, 1, 5), (0, 5, 4),  # -y
        (2, 3, 7), (2, 7, 6),  # +y
        (1, 2, 6), (1, 6, 5),  # +x
        (3, 0, 4), (3, 4, 7),  # -x
    ]
    return TriangleMesh(name=name, vertices=vertices, faces=faces)


def make_quad(width, height, name='quad'):
    """Rectangle in the local xy-plane centred on the origin, normal +z."""
    return make_grid(width, height, 1, name=name)


def make_grid(width, height, divisions, name='grid'):
    """Quad split into tiles; same footprint and normal as make_quad.

    `divisions` is a tile count per side or an (nx, ny) pair.
    """
    width, height = float(width), float(height)
    _check_extents((width, height))
    nx, ny = (divisions, divisions) if np.isscalar(divisions) else divisions
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise NonPositiveExtent('divisions must be >= 1: {!r}'.format(divisions))
    xs = np.linspace(-width / 2.0, width / 2.0, nx + 1)
    ys = np.linspace(-height / 2.0, height / 2.0, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    vertices = np.stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)], axis=1)
    row = nx + 1
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * row + i
            b, c, d = a + 1, a + row + 1, a + row
            faces.append((a, b, c))
            faces.append((a, c, d))
    normals = np.tile([0.0, 0.0, 1.0], (len(vertices), 1))
    return TriangleMesh(name=name, vertices=vertices, faces=faces, normals=normals)


def transformed(mesh, pose, name=None):
    """Bake a pose into a new mesh (used for environment surfaces)."""
    normals = None
    if mesh.normals is not None:
        normals = mesh.normals @ Pose(rotation=pose.rotation).rotation_matrix().T
        normals = normals / np.linalg.norm(normals, axis=1)[:, None]
    return TriangleMesh(
        name=name or mesh.name,
        vertices=pose.apply(mesh.vertices),
        faces=mesh.faces,
        normals=normals,
    )
