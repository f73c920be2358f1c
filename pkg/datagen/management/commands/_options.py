from django.conf import settings
from django.core.management.base import CommandError

from datagen.cli import EXIT_USAGE
from datagen.pipeline import JobConfig


def add_job_arguments(parser, spec_required=True):
    parser.add_argument('--spec', required=spec_required, help='scene-spec JSON file')
    parser.add_argument('--seed', type=int, default=0, help='global 64-bit seed')
    parser.add_argument('--min-pixels', type=int, default=None, help='visibility threshold in pixels')
    parser.add_argument('--width', type=int, default=None, help='override image width')
    parser.add_argument('--height', type=int, default=None, help='override image height')
    parser.add_argument('--region', default=None, help='restrict placement to one named region')


def job_config(options, **overrides):
    defaults = settings.DATAGEN
    width, height = options.get('width'), options.get('height')
    if (width is None) != (height is None):
        raise CommandError('--width and --height must be given together', returncode=EXIT_USAGE)
    try:
        return JobConfig(
            scene_spec_path=options.get('spec'),
            global_seed=options['seed'],
            min_pixels=defaults['MIN_PIXELS'] if options.get('min_pixels') is None else options['min_pixels'],
            image_size=(width, height) if width is not None else None,
            region=options.get('region'),
            scene_retries=defaults['SCENE_RETRIES'],
            **overrides,
        )
    except ValueError as exc:
        raise CommandError(str(exc), returncode=EXIT_USAGE)
