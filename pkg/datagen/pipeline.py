"""Deterministic parallel dataset generation.

Each image draws from its own generator seeded by derive_seed(global_seed,
index), so output never depends on which worker renders which index. The
worker side of this module only touches the geometry, render and annotate
modules; Django and DRF are imported by the functions that run in the main
process.
"""
import hashlib
import logging
import os
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotate import DEFAULT_MIN_PIXELS, ImageAnnotations, annotate_frame, build_manifest
from .exceptions import IoFailure, SceneUnsatisfiable, TooCrowded
from .mesh_io import make_box
from .render import draw_list, encode_pgm, encode_ppm, rasterize_items, triangle_count
from .scene import (
    CameraSpec,
    FurnitureSpec,
    ObjectClass,
    PlacementRegion,
    RoomSpec,
    SceneSpec,
    build_scene_instance,
)
from .transforms import Pose

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SCENE_RETRIES = 10
MANIFEST_NAME = 'annotations.json'
REPORT_NAME = 'report.json'


def derive_seed(global_seed, image_index):
    """SplitMix64 finalizer over global_seed + image_index * golden gamma (mod 2^64)."""
    z = (int(global_seed) + int(image_index) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def image_file_name(index):
    return 'img_{:08d}.ppm'.format(index)


def ids_file_name(index):
    return 'ids_{:08d}.pgm'.format(index)


@dataclass(frozen=True)
class JobConfig:
    scene_spec_path: str = None
    output_dir: str = '.'
    num_images: int = 0
    global_seed: int = 0
    workers: int = 1
    min_pixels: int = DEFAULT_MIN_PIXELS
    image_size: tuple = None
    region: str = None
    scene_retries: int = SCENE_RETRIES

    def __post_init__(self):
        if self.num_images < 0:
            raise ValueError('num_images must be >= 0')
        if self.workers < 1:
            raise ValueError('workers must be >= 1')
        if not 0 <= self.global_seed <= MASK64:
            raise ValueError('seed must be an unsigned 64-bit integer')
        if self.min_pixels < 1:
            raise ValueError('min_pixels must be >= 1')
        if self.image_size is not None and (self.image_size[0] < 1 or self.image_size[1] < 1):
            raise ValueError('image size must be positive')

    def effective_spec(self, spec):
        if self.region is not None:
            spec = spec.with_region(self.region)
        if self.image_size is not None:
            spec = spec.with_image_size(*self.image_size)
        return spec


@dataclass
class ThroughputReport:
    images_generated: int
    wall_seconds: float
    per_worker_image_counts: list
    triangle_count_mean: float
    workers: int = 1
    skipped_indices: list = field(default_factory=list)
    ms_per_image_median: float = 0.0

    @property
    def images_per_second(self):
        return self.images_generated / self.wall_seconds if self.wall_seconds > 0 else 0.0

    @property
    def images_skipped(self):
        return len(self.skipped_indices)


@dataclass(frozen=True, eq=False)
class GeneratedImage:
    index: int
    scene: object
    frames: object
    annotations: ImageAnnotations
    triangle_count: int

    @property
    def image_file(self):
        return image_file_name(self.index)

    @property
    def ids_file(self):
        return ids_file_name(self.index)


def generate_image(spec, image_index, config):
    """Sample, render and annotate one image; depends only on (spec, seed, index, config)."""
    spec = config.effective_spec(spec)
    rng = np.random.default_rng(derive_seed(config.global_seed, image_index))
    for attempt in range(config.scene_retries + 1):
        try:
            scene = build_scene_instance(spec, rng)
            break
        except TooCrowded as exc:
            logger.debug('image %d attempt %d: %s', image_index, attempt + 1, exc)
    else:
        raise SceneUnsatisfiable(image_index, config.scene_retries)

    items = draw_list(scene)
    frames = rasterize_items(scene.camera, scene.light, items)
    instance_classes = {o.instance_id: o.class_id for o in scene.objects}
    annotations = ImageAnnotations(
        file_name=image_file_name(image_index),
        width=frames.width,
        height=frames.height,
        instances=annotate_frame(frames.ids, instance_classes, config.min_pixels),
        image_id=image_index,
    )
    return GeneratedImage(
        index=image_index,
        scene=scene,
        frames=frames,
        annotations=annotations,
        triangle_count=triangle_count(items),
    )


def write_atomic(path, data):
    path = Path(path)
    tmp = path.with_name(path.name + '.tmp')
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure('cannot write {}: {}'.format(path, exc)) from exc


def write_image_files(image, output_dir):
    output_dir = Path(output_dir)
    write_atomic(output_dir / image.image_file, encode_ppm(image.frames.rgb))
    write_atomic(output_dir / image.ids_file, encode_pgm(image.frames.ids))


@dataclass(frozen=True)
class _WorkResult:
    index: int
    worker: int
    annotations: ImageAnnotations
    triangle_count: int
    seconds: float


_worker_state = {}


def _init_worker(spec, config):
    _worker_state['spec'] = spec
    _worker_state['config'] = config


def _work(image_index):
    spec = _worker_state['spec']
    config = _worker_state['config']
    start = time.perf_counter()
    try:
        image = generate_image(spec, image_index, config)
    except SceneUnsatisfiable as exc:
        logger.warning('skipping %s', exc)
        return _WorkResult(image_index, os.getpid(), None, 0, time.perf_counter() - start)
    write_image_files(image, config.output_dir)
    return _WorkResult(
        image_index, os.getpid(), image.annotations, image.triangle_count, time.perf_counter() - start
    )


def run_generation(spec, config):
    """Render config.num_images images into config.output_dir; returns (manifest, report)."""
    output_dir = Path(config.output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure('cannot create output directory {}: {}'.format(output_dir, exc)) from exc

    indices = range(config.num_images)
    logger.info('generating %d images with %d worker(s) into %s', config.num_images, config.workers, output_dir)
    start = time.perf_counter()
    if config.workers == 1 or config.num_images <= 1:
        _init_worker(spec, config)
        results = [_work(i) for i in indices]
    else:
        chunksize = max(1, config.num_images // (config.workers * 8))
        with ProcessPoolExecutor(
            max_workers=config.workers, initializer=_init_worker, initargs=(spec, config)
        ) as pool:
            results = list(pool.map(_work, indices, chunksize=chunksize))
    wall_seconds = max(time.perf_counter() - start, 1e-9)

    done = [r for r in results if r.annotations is not None]
    per_worker = Counter(r.worker for r in done)
    counts = [per_worker[w] for w in sorted(per_worker)]
    counts += [0] * (min(config.workers, max(config.num_images, 1)) - len(counts))
    report = ThroughputReport(
        images_generated=len(done),
        wall_seconds=wall_seconds,
        per_worker_image_counts=counts,
        triangle_count_mean=float(np.mean([r.triangle_count for r in done])) if done else 0.0,
        workers=config.workers,
        skipped_indices=[r.index for r in results if r.annotations is None],
        ms_per_image_median=float(np.median([r.seconds for r in done])) * 1000.0 if done else 0.0,
    )
    manifest = build_manifest([r.annotations for r in done], config.effective_spec(spec).categories)
    logger.info(
        'generated %d images (%d skipped) in %.2f s: %.1f images/s',
        report.images_generated, report.images_skipped, report.wall_seconds, report.images_per_second,
    )
    return manifest, report


def render_json(data):
    # DRF はメインプロセスでだけ読み込む (ワーカーは Django を初期化しない)
    from rest_framework.renderers import JSONRenderer
    return JSONRenderer().render(data) + b'\n'


def manifest_json(manifest):
    from .serializers import DatasetManifestSerializer
    return render_json(DatasetManifestSerializer(manifest).data)


def report_json(report):
    from .serializers import ThroughputReportSerializer
    return render_json(ThroughputReportSerializer(report).data)


def generate_dataset(config):
    """Load the scene spec, render every image, then write report.json and, last, annotations.json."""
    from .specfile import load_scene_spec
    spec = load_scene_spec(config.scene_spec_path)
    manifest, report = run_generation(spec, config)
    output_dir = Path(config.output_dir)
    write_atomic(output_dir / REPORT_NAME, report_json(report))
    write_atomic(output_dir / MANIFEST_NAME, manifest_json(manifest))
    return manifest, report


def dataset_digest(output_dir):
    """SHA-256 over names and bytes of the images, id maps and manifest (report.json excluded)."""
    output_dir = Path(output_dir)
    paths = sorted(
        list(output_dir.glob('img_*.ppm')) + list(output_dir.glob('ids_*.pgm')) + list(output_dir.glob(MANIFEST_NAME))
    )
    digest = hashlib.sha256()
    for path in paths:
        digest.update(path.name.encode('utf-8') + b'\0')
        digest.update(path.read_bytes())
    return digest.hexdigest()


def bench_scene_spec(width=320, height=240, objects=10):
    """Fixed tabletop scene used by the bench command: a table, a shelf and box-shaped objects."""
    library = [
        ObjectClass(1, 'cracker_box', make_box((0.16, 0.06, 0.21)), (0.85, 0.25, 0.2)),
        ObjectClass(2, 'sugar_box', make_box((0.09, 0.04, 0.17)), (0.9, 0.85, 0.4)),
        ObjectClass(3, 'tuna_can', make_box((0.08, 0.08, 0.035)), (0.3, 0.4, 0.75)),
        ObjectClass(4, 'jello_box', make_box((0.09, 0.03, 0.07)), (0.75, 0.2, 0.5)),
        ObjectClass(5, 'cup', make_box((0.09, 0.09, 0.09)), (0.3, 0.7, 0.35)),
    ]
    furniture = [
        FurnitureSpec('table', make_box((1.9, 1.3, 0.72)), Pose(translation=(0.0, 0.0, 0.36)), 0.05, (0.55, 0.4, 0.3)),
        FurnitureSpec('shelf', make_box((0.4, 1.2, 1.8)), Pose(translation=(2.2, 0.0, 0.9)), 0.1, (0.8, 0.8, 0.75)),
    ]
    focal = 0.9 * width
    return SceneSpec(
        room=RoomSpec(width=6.0, depth=6.0, height=3.0),
        library=library,
        regions=[PlacementRegion('table', (-0.7, -0.4, 0.7, 0.4), 0.72)],
        objects_per_scene=(max(0, objects - 2), objects + 2),
        camera=CameraSpec(
            radius_range=(1.0, 1.8), elevation_range_deg=(30.0, 70.0),
            fx=focal, fy=focal, width=width, height=height,
        ),
        furniture=furniture,
    )


def run_bench(workers=1, num_images=200, width=320, height=240, objects=10, global_seed=0, output_dir=None):
    """Generate into a scratch directory (or `output_dir`) and return the ThroughputReport."""
    spec = bench_scene_spec(width, height, objects)
    with tempfile.TemporaryDirectory(prefix='datagen-bench-') as scratch:
        config = JobConfig(
            output_dir=output_dir or scratch, num_images=num_images, global_seed=global_seed, workers=workers,
        )
        _, report = run_generation(spec, config)
    return report
