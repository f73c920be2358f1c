"""Instance masks, boxes and run-length encodings from id buffers; manifest assembly."""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BadRle, DuplicateFileName, EmptyMask, InvalidGeometry

DEFAULT_MIN_PIXELS = 32


@dataclass(frozen=True, eq=False)
class InstanceMask:
    instance_id: int
    bitmap: np.ndarray

    def __post_init__(self):
        bitmap = np.asarray(self.bitmap, dtype=bool)
        if bitmap.ndim != 2:
            raise InvalidGeometry('mask bitmap must be 2-D')
        if not bitmap.any():
            raise EmptyMask('instance {} has no visible pixels'.format(self.instance_id))
        object.__setattr__(self, 'bitmap', bitmap)

    @property
    def width(self):
        return self.bitmap.shape[1]

    @property
    def height(self):
        return self.bitmap.shape[0]

    @property
    def area(self):
        return int(np.count_nonzero(self.bitmap))


@dataclass(frozen=True)
class InstanceAnnotation:
    """Annotation of one visible instance before ids are assigned by the manifest."""

    instance_id: int
    category_id: int
    bbox: tuple
    area: int
    counts: tuple


@dataclass(frozen=True)
class ImageAnnotations:
    file_name: str
    width: int
    height: int
    instances: tuple = ()
    image_id: int = None


@dataclass(frozen=True)
class ImageRecord:
    id: int
    file_name: str
    width: int
    height: int


@dataclass(frozen=True)
class AnnotationRecord:
    id: int
    image_id: int
    category_id: int
    bbox: list
    area: int
    segmentation: dict
    iscrowd: int = 0


@dataclass(frozen=True)
class Category:
    id: int
    name: str


@dataclass
class DatasetManifest:
    images: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    categories: list = field(default_factory=list)


def extract_instances(ids, min_pixels=DEFAULT_MIN_PIXELS):
    """One mask per nonzero id with at least `min_pixels` pixels, by ascending id."""
    if min_pixels < 1:
        raise ValueError('min_pixels must be >= 1')
    ids = np.asarray(ids)
    values, counts = np.unique(ids, return_counts=True)
    masks = []
    for value, count in zip(values, counts):
        if value == 0 or count < min_pixels:
            continue
        masks.append(InstanceMask(instance_id=int(value), bitmap=ids == value))
    return masks


def bbox_of(mask):
    """Tight [x, y, w, h] of the true pixels."""
    bitmap = mask.bitmap if isinstance(mask, InstanceMask) else np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(bitmap.any(axis=1))
    cols = np.flatnonzero(bitmap.any(axis=0))
    if not len(rows):
        raise EmptyMask('mask has no true pixels')
    return [int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1)]


def encode_rle(mask):
    """Column-major run lengths, alternating 0-runs and 1-runs, starting with a (possibly empty) 0-run."""
    bitmap = mask.bitmap if isinstance(mask, InstanceMask) else np.asarray(mask, dtype=bool)
    if bitmap.size == 0:
        raise InvalidGeometry('mask dimensions must be positive')
    pixels = bitmap.ravel(order='F').astype(np.int8)
    changes = np.flatnonzero(np.diff(pixels)) + 1
    bounds = np.concatenate(([0], changes, [pixels.size]))
    runs = np.diff(bounds).tolist()
    if pixels[0]:
        runs.insert(0, 0)
    return runs


def decode_rle(counts, width, height):
    if width < 1 or height < 1:
        raise InvalidGeometry('mask dimensions must be positive')
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 1 or np.any(counts < 0):
        raise BadRle('counts must be a list of non-negative integers')
    if int(counts.sum()) != width * height:
        raise BadRle('counts sum to {}, expected {}'.format(int(counts.sum()), width * height))
    values = np.arange(len(counts)) % 2 == 1
    pixels = np.repeat(values, counts)
    return pixels.reshape((height, width), order='F')


def annotate_frame(ids, instance_classes, min_pixels=DEFAULT_MIN_PIXELS):
    """Per-image annotations: one entry per sufficiently visible instance."""
    annotations = []
    for mask in extract_instances(ids, min_pixels):
        annotations.append(InstanceAnnotation(
            instance_id=mask.instance_id,
            category_id=int(instance_classes[mask.instance_id]),
            bbox=tuple(bbox_of(mask)),
            area=mask.area,
            counts=tuple(encode_rle(mask)),
        ))
    return tuple(annotations)


def build_manifest(images, categories):
    """Reduce per-image annotations, in image order, into a DatasetManifest.

    Image ids are the image index carried by each entry (its position in
    `images` when it carries none); annotation ids count from 1 in input
    order, then by instance id; categories are sorted by id.
    """
    manifest = DatasetManifest(
        categories=[Category(int(cid), str(name)) for cid, name in sorted(categories, key=lambda c: c[0])],
    )
    known = {c.id for c in manifest.categories}
    seen = set()
    next_id = 1
    for position, image in enumerate(images):
        image_id = position if image.image_id is None else int(image.image_id)
        if image.file_name in seen:
            raise DuplicateFileName('duplicate image file name: {}'.format(image.file_name))
        seen.add(image.file_name)
        manifest.images.append(ImageRecord(image_id, image.file_name, image.width, image.height))
        for instance in sorted(image.instances, key=lambda a: a.instance_id):
            if instance.category_id not in known:
                raise InvalidGeometry('unknown category id {}'.format(instance.category_id))
            manifest.annotations.append(AnnotationRecord(
                id=next_id,
                image_id=image_id,
                category_id=instance.category_id,
                bbox=list(instance.bbox),
                area=instance.area,
                segmentation={'size': [image.height, image.width], 'counts': list(instance.counts)},
            ))
            next_id += 1
    return manifest
