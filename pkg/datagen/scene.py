"""Scene templates and domain-randomized sampling of concrete scenes."""
import enum
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .camera import Camera, look_at, spherical_offset
from .exceptions import InvalidGeometry, TooCrowded
from .mesh_io import Aabb, TriangleMesh, compute_aabb, make_grid, transformed
from .transforms import Pose

logger = logging.getLogger(__name__)

__all__ = [
    'Pose', 'PlacementRegion', 'ObjectClass', 'ObjectInstance', 'LightSpec', 'Pattern',
    'BackgroundSpec', 'SurfaceRange', 'FurnitureSpec', 'RoomSpec', 'CameraSpec',
    'SceneSpec', 'SceneInstance', 'place_objects', 'sample_light', 'sample_background',
    'sample_backgrounds', 'jitter_furniture', 'sample_camera', 'build_scene_instance',
]

PLACEMENT_ATTEMPTS = 100
FURNITURE_YAW_JITTER = math.radians(15.0)
INTENSITY_RANGE = (0.5, 1.5)
AMBIENT_RANGE = (0.1, 0.4)
MAX_ELEVATION_DEG = 85.0
# インスタンス id は 16 bit の PGM に書けなければならない
MAX_OBJECTS_PER_SCENE = 65535
SURFACE_GROUPS = ('floor', 'wall', 'ceiling')


def _rgb(values, what):
    rgb = tuple(float(c) for c in values)
    if len(rgb) != 3 or not all(0.0 <= c <= 1.0 for c in rgb):
        raise InvalidGeometry('{} must be 3 values in [0, 1]: {!r}'.format(what, values))
    return rgb


@dataclass(frozen=True)
class PlacementRegion:
    name: str
    rect: tuple
    support_z: float = 0.0

    def __post_init__(self):
        rect = tuple(float(c) for c in self.rect)
        if len(rect) != 4 or not (rect[0] < rect[2] and rect[1] < rect[3]):
            raise InvalidGeometry('region {!r}: rect must be (x_min, y_min, x_max, y_max) with min < max'.format(self.name))
        object.__setattr__(self, 'rect', rect)

    @property
    def center(self):
        x_min, y_min, x_max, y_max = self.rect
        return np.array([(x_min + x_max) / 2.0, (y_min + y_max) / 2.0, self.support_z])


@dataclass(frozen=True, eq=False)
class ObjectClass:
    class_id: int
    class_name: str
    mesh: TriangleMesh
    base_albedo: tuple = (0.7, 0.7, 0.7)

    def __post_init__(self):
        if self.class_id < 1:
            raise InvalidGeometry('class_id must be positive: {}'.format(self.class_id))
        if not self.class_name:
            raise InvalidGeometry('class_name must not be empty')
        object.__setattr__(self, 'base_albedo', _rgb(self.base_albedo, 'base_albedo'))


@dataclass(frozen=True)
class ObjectInstance:
    instance_id: int
    class_id: int
    pose: Pose
    albedo: tuple

    def __post_init__(self):
        if self.instance_id < 1:
            raise InvalidGeometry('instance_id 0 is reserved for the background')
        object.__setattr__(self, 'albedo', _rgb(self.albedo, 'albedo'))

    def to_dict(self):
        return {
            'instance_id': self.instance_id,
            'class_id': self.class_id,
            'pose': self.pose.to_dict(),
            'albedo': list(self.albedo),
        }


@dataclass(frozen=True)
class LightSpec:
    direction: tuple
    intensity: float
    ambient: float

    def __post_init__(self):
        direction = tuple(float(c) for c in self.direction)
        if abs(math.sqrt(sum(c * c for c in direction)) - 1.0) > 1e-6:
            raise InvalidGeometry('light direction must be a unit vector')
        if not INTENSITY_RANGE[0] <= self.intensity <= INTENSITY_RANGE[1]:
            raise InvalidGeometry('light intensity out of range: {}'.format(self.intensity))
        if not AMBIENT_RANGE[0] <= self.ambient <= AMBIENT_RANGE[1]:
            raise InvalidGeometry('ambient out of range: {}'.format(self.ambient))
        object.__setattr__(self, 'direction', direction)

    def to_dict(self):
        return {'direction': list(self.direction), 'intensity': self.intensity, 'ambient': self.ambient}


class Pattern(str, enum.Enum):
    SOLID = 'solid'
    CHECKER = 'checker'


@dataclass(frozen=True)
class BackgroundSpec:
    pattern: Pattern
    color_a: tuple
    color_b: tuple
    checker_period: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'pattern', Pattern(self.pattern))
        object.__setattr__(self, 'color_a', _rgb(self.color_a, 'color_a'))
        object.__setattr__(self, 'color_b', _rgb(self.color_b, 'color_b'))
        if self.pattern is Pattern.CHECKER and not self.checker_period > 0:
            raise InvalidGeometry('checker_period must be positive')

    def color_at(self, x, y):
        """(N, 3) albedo of the pattern at world xy."""
        x = np.asarray(x, dtype=np.float64)
        color_a = np.asarray(self.color_a)
        if self.pattern is Pattern.SOLID:
            return np.broadcast_to(color_a, x.shape + (3,))
        parity = (np.floor(x / self.checker_period) + np.floor(np.asarray(y) / self.checker_period)) % 2.0
        return np.where((parity == 0.0)[..., None], color_a, np.asarray(self.color_b))

    def to_dict(self):
        return {
            'pattern': self.pattern.value,
            'color_a': list(self.color_a),
            'color_b': list(self.color_b),
            'checker_period': self.checker_period,
        }


@dataclass(frozen=True)
class SurfaceRange:
    patterns: tuple = (Pattern.SOLID, Pattern.CHECKER)
    period_range: tuple = (0.2, 1.0)

    def __post_init__(self):
        object.__setattr__(self, 'patterns', tuple(Pattern(p) for p in self.patterns))
        if not self.patterns:
            raise InvalidGeometry('at least one background pattern is required')
        lo, hi = self.period_range
        if not 0 < lo <= hi:
            raise InvalidGeometry('period_range must satisfy 0 < lo <= hi')


@dataclass(frozen=True, eq=False)
class FurnitureSpec:
    name: str
    mesh: TriangleMesh
    pose: Pose = field(default_factory=Pose)
    jitter_radius: float = 0.0
    albedo: tuple = (0.6, 0.6, 0.6)

    def __post_init__(self):
        if self.jitter_radius < 0:
            raise InvalidGeometry('furniture {!r}: jitter_radius must be >= 0'.format(self.name))
        object.__setattr__(self, 'albedo', _rgb(self.albedo, 'albedo'))


@dataclass(frozen=True)
class RoomSpec:
    """Room box centred on the origin in xy; floor at z = 0."""

    width: float
    depth: float
    height: float
    tile_size: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.depth > 0 and self.height > 0 and self.tile_size > 0):
            raise InvalidGeometry('room dimensions must be positive')

    def contains_rect(self, rect):
        x_min, y_min, x_max, y_max = rect
        return (
            x_min >= -self.width / 2.0 and x_max <= self.width / 2.0
            and y_min >= -self.depth / 2.0 and y_max <= self.depth / 2.0
        )

    def _tiles(self, length):
        return max(1, int(math.ceil(length / self.tile_size)))

    @cached_property
    def surfaces(self):
        """(group, world-space mesh) pairs in draw order: floor, four walls, ceiling."""
        w, d, h = self.width, self.depth, self.height
        tw, td, th = self._tiles(w), self._tiles(d), self._tiles(h)
        quarter = math.pi / 2.0
        floor = make_grid(w, d, (tw, td), name='floor')
        long_wall = make_grid(w, h, (tw, th))
        short_wall = make_grid(d, h, (td, th))
        # 壁は quad を x 軸まわりに立ててから z 軸まわりに回す
        stand = Pose(rotation=(math.cos(quarter / 2.0), math.sin(quarter / 2.0), 0.0, 0.0))
        walls = [
            ('wall_south', long_wall, 0.0, (0.0, -d / 2.0, h / 2.0)),
            ('wall_east', short_wall, quarter, (w / 2.0, 0.0, h / 2.0)),
            ('wall_north', long_wall, 2.0 * quarter, (0.0, d / 2.0, h / 2.0)),
            ('wall_west', short_wall, 3.0 * quarter, (-w / 2.0, 0.0, h / 2.0)),
        ]
        result = [('floor', floor)]
        for name, mesh, yaw, translation in walls:
            pose = Pose.from_yaw(yaw, translation).compose(stand)
            result.append(('wall', transformed(mesh, pose, name=name)))
        ceiling = transformed(floor, Pose(translation=(0.0, 0.0, h)), name='ceiling')
        result.append(('ceiling', ceiling))
        return tuple(result)


@dataclass(frozen=True)
class CameraSpec:
    radius_range: tuple = (1.0, 2.0)
    elevation_range_deg: tuple = (20.0, 70.0)
    fx: float = 525.0
    fy: float = 525.0
    width: int = 640
    height: int = 480
    cx: float = None
    cy: float = None

    def __post_init__(self):
        r_lo, r_hi = self.radius_range
        e_lo, e_hi = self.elevation_range_deg
        if not 0 < r_lo <= r_hi:
            raise InvalidGeometry('camera radius_range must satisfy 0 < lo <= hi')
        if not 0.0 < e_lo <= e_hi <= MAX_ELEVATION_DEG:
            raise InvalidGeometry('camera elevation_range_deg must satisfy 0 < lo <= hi <= 85')

    @property
    def intrinsics(self):
        cx = self.width / 2.0 if self.cx is None else self.cx
        cy = self.height / 2.0 if self.cy is None else self.cy
        return (self.fx, self.fy, cx, cy)

    def resized(self, width, height):
        fx, fy, cx, cy = self.intrinsics
        sx, sy = width / self.width, height / self.height
        return replace(
            self, fx=fx * sx, fy=fy * sy, cx=cx * sx, cy=cy * sy, width=int(width), height=int(height)
        )


@dataclass(frozen=True, eq=False)
class SceneSpec:
    room: RoomSpec
    library: tuple
    regions: tuple
    objects_per_scene: tuple = (1, 5)
    camera: CameraSpec = field(default_factory=CameraSpec)
    furniture: tuple = ()
    surfaces: dict = field(default_factory=lambda: {group: SurfaceRange() for group in SURFACE_GROUPS})
    albedo_jitter: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, 'library', tuple(self.library))
        object.__setattr__(self, 'regions', tuple(self.regions))
        object.__setattr__(self, 'furniture', tuple(self.furniture))
        surfaces = {group: SurfaceRange() for group in SURFACE_GROUPS}
        surfaces.update(self.surfaces)
        object.__setattr__(self, 'surfaces', surfaces)
        lo, hi = self.objects_per_scene
        if not 0 <= lo <= hi <= MAX_OBJECTS_PER_SCENE:
            raise InvalidGeometry('objects_per_scene must satisfy 0 <= lo <= hi <= {}'.format(MAX_OBJECTS_PER_SCENE))
        if not self.regions:
            raise InvalidGeometry('at least one placement region is required')
        if hi > 0 and not self.library:
            raise InvalidGeometry('object library is empty')
        class_ids = [c.class_id for c in self.library]
        if len(set(class_ids)) != len(class_ids):
            raise InvalidGeometry('class ids must be unique')
        for region in self.regions:
            if not self.room.contains_rect(region.rect):
                raise InvalidGeometry('region {!r} lies outside the room'.format(region.name))

    @property
    def classes(self):
        return {c.class_id: c for c in self.library}

    @property
    def categories(self):
        return [(c.class_id, c.class_name) for c in sorted(self.library, key=lambda c: c.class_id)]

    def with_region(self, name):
        regions = [r for r in self.regions if r.name == name]
        if not regions:
            raise InvalidGeometry('no placement region named {!r}'.format(name))
        return replace(self, regions=tuple(regions))

    def with_image_size(self, width, height):
        return replace(self, camera=self.camera.resized(width, height))


@dataclass(frozen=True, eq=False)
class SceneInstance:
    room: RoomSpec
    classes: dict
    furniture: tuple
    furniture_poses: tuple
    objects: tuple
    light: LightSpec
    backgrounds: dict
    camera: Camera
    region: PlacementRegion = None

    def object_aabbs(self):
        return [compute_aabb(self.classes[o.class_id].mesh, o.pose) for o in self.objects]

    def to_dict(self):
        return {
            'region': self.region.name if self.region else None,
            'furniture': [
                {'name': f.name, 'pose': pose.to_dict()}
                for f, pose in zip(self.furniture, self.furniture_poses)
            ],
            'objects': [o.to_dict() for o in self.objects],
            'light': self.light.to_dict(),
            'backgrounds': {group: bg.to_dict() for group, bg in self.backgrounds.items()},
            'camera': self.camera.to_dict(),
        }


def place_objects(library, region, count, rng, albedo_jitter=0.0):
    """Rejection-sample `count` upright, non-overlapping objects inside `region`."""
    if count < 0:
        raise ValueError('count must be >= 0')
    if count and not library:
        raise ValueError('library must not be empty when count > 0')

    instances = []
    placed = []
    for instance_id in range(1, count + 1):
        object_class = library[int(rng.integers(len(library)))]
        for attempt in range(PLACEMENT_ATTEMPTS):
            yaw = rng.uniform(0.0, 2.0 * math.pi)
            local = compute_aabb(object_class.mesh, Pose.from_yaw(yaw))
            x = rng.uniform(region.rect[0], region.rect[2])
            y = rng.uniform(region.rect[1], region.rect[3])
            translation = (x, y, region.support_z - local.min[2])
            box = local.translated(translation)
            if box.footprint_inside(region.rect) and not any(box.intersects(other) for other in placed):
                break
        else:
            raise TooCrowded(
                'region {!r}: object {} ({}) did not fit after {} attempts'.format(
                    region.name, instance_id, object_class.class_name, PLACEMENT_ATTEMPTS
                )
            )
        logger.debug('placed instance %d after %d attempts', instance_id, attempt + 1)
        jitter = rng.uniform(-albedo_jitter, albedo_jitter, size=3)
        albedo = np.clip(np.asarray(object_class.base_albedo) + jitter, 0.0, 1.0)
        placed.append(box)
        instances.append(ObjectInstance(
            instance_id=instance_id,
            class_id=object_class.class_id,
            pose=Pose.from_yaw(yaw, translation),
            albedo=tuple(albedo),
        ))
    return instances


def sample_light(rng):
    # 上半球から一様に来る光: 向きの z 成分は常に下向き
    cos_theta = 1.0 - rng.random()
    phi = rng.uniform(0.0, 2.0 * math.pi)
    sin_theta = math.sqrt(max(0.0, 1.0 - cos_theta * cos_theta))
    direction = np.array([sin_theta * math.cos(phi), sin_theta * math.sin(phi), -cos_theta])
    direction /= np.linalg.norm(direction)
    return LightSpec(
        direction=tuple(direction),
        intensity=rng.uniform(*INTENSITY_RANGE),
        ambient=rng.uniform(*AMBIENT_RANGE),
    )


def sample_background(rng, surface_range=None):
    surface_range = surface_range or SurfaceRange()
    pattern = surface_range.patterns[int(rng.integers(len(surface_range.patterns)))]
    color_a = rng.random(3)
    color_b = rng.random(3)
    period = rng.uniform(*surface_range.period_range)
    return BackgroundSpec(pattern=pattern, color_a=tuple(color_a), color_b=tuple(color_b), checker_period=period)


def sample_backgrounds(rng, surfaces):
    return {group: sample_background(rng, surfaces.get(group)) for group in SURFACE_GROUPS}


def jitter_furniture(spec, rng):
    """Jittered pose per furniture piece; pieces with jitter_radius 0 stay at their nominal pose."""
    furniture = spec.furniture if isinstance(spec, SceneSpec) else spec
    poses = []
    for piece in furniture:
        if piece.jitter_radius == 0.0:
            poses.append(piece.pose)
            continue
        radius = piece.jitter_radius * math.sqrt(rng.random())
        angle = rng.uniform(0.0, 2.0 * math.pi)
        yaw = rng.uniform(-FURNITURE_YAW_JITTER, FURNITURE_YAW_JITTER)
        tx, ty, tz = piece.pose.translation
        offset = Pose.from_yaw(yaw, (tx + radius * math.cos(angle), ty + radius * math.sin(angle), tz))
        poses.append(offset.compose(Pose(rotation=piece.pose.rotation)))
    return tuple(poses)


def sample_camera(target, rng, radius_range, elevation_range, intrinsics, image_size):
    """Look-at camera on a sphere around `target`; angles in degrees, world up +z."""
    r_lo, r_hi = radius_range
    e_lo, e_hi = elevation_range
    if not 0 < r_lo <= r_hi:
        raise InvalidGeometry('radius_range must satisfy 0 < lo <= hi')
    if not 0.0 < e_lo <= e_hi <= MAX_ELEVATION_DEG:
        raise InvalidGeometry('elevation_range must satisfy 0 < lo <= hi <= 85')
    fx, fy, cx, cy = intrinsics
    width, height = image_size
    cx = width / 2.0 if cx is None else cx
    cy = height / 2.0 if cy is None else cy

    radius = rng.uniform(r_lo, r_hi)
    azimuth = rng.uniform(0.0, 2.0 * math.pi)
    elevation = math.radians(rng.uniform(e_lo, e_hi))
    target = np.asarray(target, dtype=np.float64)
    position = target + spherical_offset(radius, azimuth, elevation)
    return Camera(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height, pose=look_at(position, target))


def build_scene_instance(spec, rng):
    """Sample one concrete scene; a pure function of (spec, rng state)."""
    furniture_poses = jitter_furniture(spec, rng)
    light = sample_light(rng)
    backgrounds = sample_backgrounds(rng, spec.surfaces)
    region = spec.regions[int(rng.integers(len(spec.regions)))]
    lo, hi = spec.objects_per_scene
    count = int(rng.integers(lo, hi + 1))
    objects = place_objects(spec.library, region, count, rng, albedo_jitter=spec.albedo_jitter)
    camera_spec = spec.camera
    camera = sample_camera(
        region.center,
        rng,
        camera_spec.radius_range,
        camera_spec.elevation_range_deg,
        camera_spec.intrinsics,
        (camera_spec.width, camera_spec.height),
    )
    return SceneInstance(
        room=spec.room,
        classes=spec.classes,
        furniture=spec.furniture,
        furniture_poses=furniture_poses,
        objects=tuple(objects),
        light=light,
        backgrounds=backgrounds,
        camera=camera,
        region=region,
    )
