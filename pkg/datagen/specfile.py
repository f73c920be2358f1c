"""Loading scene-spec JSON files into SceneSpec objects."""
import json
import logging
from pathlib import Path

from .exceptions import IoFailure, MeshError, SpecParseError, SpecValidationError
from .serializers import SceneSpecSerializer

logger = logging.getLogger(__name__)


def parse_scene_spec(text, base_dir='.', path=None):
    """Parse and validate spec JSON text; mesh paths resolve against `base_dir`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, exc.lineno, exc.colno, path=path) from exc

    serializer = SceneSpecSerializer(data=data, context={'base_dir': Path(base_dir)})
    if not serializer.is_valid():
        raise SpecValidationError(serializer.errors, path=path)
    try:
        spec = serializer.save()
    except MeshError as exc:
        raise SpecValidationError({'mesh': [str(exc)]}, path=path) from exc
    except OSError as exc:
        raise SpecValidationError({'mesh': ['cannot read mesh file: {}'.format(exc)]}, path=path) from exc
    logger.info(
        'loaded scene spec %s: %d classes, %d regions, %d furniture pieces',
        path or '<text>', len(spec.library), len(spec.regions), len(spec.furniture),
    )
    return spec


def load_scene_spec(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise IoFailure('cannot read scene spec {}: {}'.format(path, exc)) from exc
    return parse_scene_spec(text, base_dir=path.parent, path=str(path))
