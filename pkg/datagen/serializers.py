import math
from pathlib import Path

from rest_framework import serializers

from .mesh_io import load_obj, make_box
from .models import GenerationRun
from .scene import (
    CameraSpec,
    FurnitureSpec,
    MAX_ELEVATION_DEG,
    MAX_OBJECTS_PER_SCENE,
    ObjectClass,
    PlacementRegion,
    RoomSpec,
    SceneSpec,
    SurfaceRange,
)
from .transforms import Pose


def vector(length, **kwargs):
    return serializers.ListField(
        child=serializers.FloatField(), min_length=length, max_length=length, **kwargs
    )


def color(**kwargs):
    return serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0), min_length=3, max_length=3, **kwargs
    )


def positive(value):
    if not value > 0:
        raise serializers.ValidationError('Ensure this value is greater than 0.')


## ==================================================================
## シーン定義ファイル (JSON) のスキーマ
## ==================================================================

class RoomSerializer(serializers.Serializer):
    width = serializers.FloatField(validators=[positive])
    depth = serializers.FloatField(validators=[positive])
    height = serializers.FloatField(validators=[positive])
    tile_size = serializers.FloatField(validators=[positive], default=1.0)


class PoseSerializer(serializers.Serializer):
    translation = vector(3, default=lambda: [0.0, 0.0, 0.0])
    yaw_deg = serializers.FloatField(default=0.0)


class SurfaceRangeSerializer(serializers.Serializer):
    patterns = serializers.ListField(
        child=serializers.ChoiceField(choices=['solid', 'checker']),
        min_length=1,
        default=lambda: ['solid', 'checker'],
    )
    period_range = vector(2, default=lambda: [0.2, 1.0])

    def validate_period_range(self, value):
        if not 0 < value[0] <= value[1]:
            raise serializers.ValidationError('period_range must satisfy 0 < lo <= hi.')
        return value


class SurfacesSerializer(serializers.Serializer):
    floor = SurfaceRangeSerializer(required=False)
    wall = SurfaceRangeSerializer(required=False)
    ceiling = SurfaceRangeSerializer(required=False)


class MeshSourceSerializer(serializers.Serializer):
    mesh_path = serializers.CharField(required=False)
    box = vector(3, required=False)

    def validate_box(self, value):
        if not all(v > 0 for v in value):
            raise serializers.ValidationError('box extents must be positive.')
        return value

    def validate(self, attrs):
        if ('mesh_path' in attrs) == ('box' in attrs):
            raise serializers.ValidationError('Give exactly one of mesh_path or box.')
        return attrs


class FurnitureSerializer(MeshSourceSerializer):
    name = serializers.CharField(default='furniture')
    pose = PoseSerializer(required=False)
    jitter_radius = serializers.FloatField(min_value=0.0, default=0.0)
    albedo = color(default=lambda: [0.6, 0.6, 0.6])


class ObjectClassSerializer(MeshSourceSerializer):
    class_id = serializers.IntegerField(min_value=1)
    name = serializers.CharField()
    albedo = color(default=lambda: [0.7, 0.7, 0.7])


class RegionSerializer(serializers.Serializer):
    name = serializers.CharField()
    rect = vector(4)
    support_z = serializers.FloatField(default=0.0)

    def validate_rect(self, value):
        x_min, y_min, x_max, y_max = value
        if not (x_min < x_max and y_min < y_max):
            raise serializers.ValidationError('rect must be [x_min, y_min, x_max, y_max] with min < max.')
        return value


class CameraSerializer(serializers.Serializer):
    radius_range = vector(2)
    elevation_range_deg = vector(2)
    fx = serializers.FloatField(validators=[positive])
    fy = serializers.FloatField(validators=[positive])
    cx = serializers.FloatField(required=False)
    cy = serializers.FloatField(required=False)
    width = serializers.IntegerField(min_value=1, default=640)
    height = serializers.IntegerField(min_value=1, default=480)

    def validate_radius_range(self, value):
        if not 0 < value[0] <= value[1]:
            raise serializers.ValidationError('radius_range must satisfy 0 < lo <= hi.')
        return value

    def validate_elevation_range_deg(self, value):
        if not 0.0 < value[0] <= value[1] <= MAX_ELEVATION_DEG:
            raise serializers.ValidationError('elevation_range_deg must satisfy 0 < lo <= hi <= 85.')
        return value

    def validate(self, attrs):
        if 'cx' in attrs and not 0 <= attrs['cx'] < attrs['width']:
            raise serializers.ValidationError({'cx': 'cx must lie inside the image width.'})
        if 'cy' in attrs and not 0 <= attrs['cy'] < attrs['height']:
            raise serializers.ValidationError({'cy': 'cy must lie inside the image height.'})
        return attrs


class SceneSpecSerializer(serializers.Serializer):
    room = RoomSerializer()
    surfaces = SurfacesSerializer(required=False)
    furniture = FurnitureSerializer(many=True, required=False)
    object_library = ObjectClassSerializer(many=True, allow_empty=True)
    regions = RegionSerializer(many=True, allow_empty=False)
    objects_per_scene = serializers.ListField(
        child=serializers.IntegerField(min_value=0, max_value=MAX_OBJECTS_PER_SCENE),
        min_length=2, max_length=2, default=lambda: [1, 5],
    )
    camera = CameraSerializer()
    albedo_jitter = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.1)

    def validate_objects_per_scene(self, value):
        if value[0] > value[1]:
            raise serializers.ValidationError('objects_per_scene must satisfy lo <= hi.')
        return value

    def validate(self, attrs):
        room = attrs['room']
        half_w, half_d = room['width'] / 2.0, room['depth'] / 2.0
        errors = {}

        # 配置領域は部屋の内側に収まっている事
        region_errors = []
        names = set()
        for region in attrs['regions']:
            x_min, y_min, x_max, y_max = region['rect']
            if x_min < -half_w or x_max > half_w or y_min < -half_d or y_max > half_d:
                region_errors.append('region {!r} lies outside the room.'.format(region['name']))
            elif not 0.0 <= region['support_z'] < room['height']:
                region_errors.append('region {!r} support_z is outside the room height.'.format(region['name']))
            if region['name'] in names:
                region_errors.append('region name {!r} is used twice.'.format(region['name']))
            names.add(region['name'])
        if region_errors:
            errors['regions'] = region_errors

        class_ids = [c['class_id'] for c in attrs['object_library']]
        duplicated = sorted({cid for cid in class_ids if class_ids.count(cid) > 1})
        if duplicated:
            errors['object_library'] = ['class_id {} is used twice.'.format(cid) for cid in duplicated]
        elif attrs['objects_per_scene'][1] > 0 and not class_ids:
            errors['object_library'] = ['object_library is empty but objects_per_scene allows objects.']

        # カメラは部屋の中に留まる事 (壁の外からでは何も写らない)
        camera = attrs['camera']
        r_hi = camera['radius_range'][1]
        e_lo, e_hi = (math.radians(e) for e in camera['elevation_range_deg'])
        camera_errors = []
        for region in attrs['regions']:
            x_min, y_min, x_max, y_max = region['rect']
            cx, cy = (x_min + x_max) / 2.0, (y_min + y_max) / 2.0
            reach = r_hi * math.cos(e_lo)
            top = region['support_z'] + r_hi * math.sin(e_hi)
            if abs(cx) + reach >= half_w or abs(cy) + reach >= half_d:
                camera_errors.append('camera around region {!r} can leave the room.'.format(region['name']))
            if top >= room['height']:
                camera_errors.append(
                    'camera around region {!r} can rise to z={:.3f}, above the room height.'.format(region['name'], top)
                )
        if camera_errors and 'regions' not in errors:
            errors['camera'] = camera_errors

        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def _mesh(self, entry, default_name):
        if 'box' in entry:
            return make_box(entry['box'], name=entry.get('name', default_name))
        path = Path(entry['mesh_path'])
        if not path.is_absolute():
            path = Path(self.context.get('base_dir', '.')) / path
        cache = self.context.setdefault('mesh_cache', {})
        if path not in cache:
            cache[path] = load_obj(path, name=path.stem)
        return cache[path]

    def create(self, validated_data):
        room = RoomSpec(**validated_data['room'])
        surfaces = {
            group: SurfaceRange(patterns=tuple(value['patterns']), period_range=tuple(value['period_range']))
            for group, value in validated_data.get('surfaces', {}).items()
        }
        furniture = []
        for i, entry in enumerate(validated_data.get('furniture', [])):
            pose = entry.get('pose', {'translation': [0.0, 0.0, 0.0], 'yaw_deg': 0.0})
            furniture.append(FurnitureSpec(
                name=entry['name'],
                mesh=self._mesh(entry, 'furniture_{}'.format(i)),
                pose=Pose.from_yaw(math.radians(pose['yaw_deg']), tuple(pose['translation'])),
                jitter_radius=entry['jitter_radius'],
                albedo=tuple(entry['albedo']),
            ))
        library = [
            ObjectClass(
                class_id=entry['class_id'],
                class_name=entry['name'],
                mesh=self._mesh(entry, entry['name']),
                base_albedo=tuple(entry['albedo']),
            )
            for entry in validated_data['object_library']
        ]
        regions = [
            PlacementRegion(name=r['name'], rect=tuple(r['rect']), support_z=r['support_z'])
            for r in validated_data['regions']
        ]
        camera = validated_data['camera']
        return SceneSpec(
            room=room,
            library=library,
            regions=regions,
            objects_per_scene=tuple(validated_data['objects_per_scene']),
            camera=CameraSpec(
                radius_range=tuple(camera['radius_range']),
                elevation_range_deg=tuple(camera['elevation_range_deg']),
                fx=camera['fx'],
                fy=camera['fy'],
                width=camera['width'],
                height=camera['height'],
                cx=camera.get('cx'),
                cy=camera.get('cy'),
            ),
            furniture=furniture,
            surfaces=surfaces,
            albedo_jitter=validated_data['albedo_jitter'],
        )


## ==================================================================
## データセットのマニフェスト (annotations.json)
## ==================================================================

class ImageRecordSerializer(serializers.Serializer):
    id = serializers.IntegerField()
    file_name = serializers.CharField()
    width = serializers.IntegerField()
    height = serializers.IntegerField()


class SegmentationSerializer(serializers.Serializer):
    size = serializers.ListField(child=serializers.IntegerField())
    counts = serializers.ListField(child=serializers.IntegerField())


class AnnotationRecordSerializer(serializers.Serializer):
    id = serializers.IntegerField()
    image_id = serializers.IntegerField()
    category_id = serializers.IntegerField()
    bbox = serializers.ListField(child=serializers.IntegerField())
    area = serializers.IntegerField()
    segmentation = SegmentationSerializer()
    iscrowd = serializers.IntegerField()


class CategorySerializer(serializers.Serializer):
    id = serializers.IntegerField()
    name = serializers.CharField()


class DatasetManifestSerializer(serializers.Serializer):
    images = ImageRecordSerializer(many=True)
    annotations = AnnotationRecordSerializer(many=True)
    categories = CategorySerializer(many=True)


## ==================================================================
## 生成処理の計測結果
## ==================================================================

class ThroughputReportSerializer(serializers.Serializer):
    images_generated = serializers.IntegerField()
    images_skipped = serializers.IntegerField()
    skipped_indices = serializers.ListField(child=serializers.IntegerField())
    wall_seconds = serializers.FloatField()
    images_per_second = serializers.FloatField()
    ms_per_image_median = serializers.FloatField()
    workers = serializers.IntegerField()
    per_worker_image_counts = serializers.ListField(child=serializers.IntegerField())
    triangle_count_mean = serializers.FloatField()


class GenerationRunSerializer(serializers.ModelSerializer):
    class Meta:
        model = GenerationRun
        fields = [
            'id', 'kind', 'spec_path', 'output_dir', 'num_images', 'global_seed', 'workers',
            'min_pixels', 'images_generated', 'images_skipped', 'wall_seconds',
            'images_per_second', 'triangle_count_mean', 'dataset_digest', 'created_at',
        ]
        read_only_fields = fields
