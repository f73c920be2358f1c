import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from datagen.cli import EXIT_UNSATISFIABLE, command_error
from datagen.exceptions import DatagenError
from datagen.models import GenerationRun
from datagen.pipeline import dataset_digest, generate_dataset

from ._options import add_job_arguments, job_config

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Generate a synthetic instance-segmentation dataset (images, id maps, annotations.json).'

    def add_arguments(self, parser):
        add_job_arguments(parser)
        parser.add_argument('--out', required=True, help='output directory')
        parser.add_argument('--num', type=int, required=True, help='number of images')
        parser.add_argument('--workers', type=int, default=None, help='worker processes')
        parser.add_argument('--record', action='store_true', help='store the run in the database')

    def handle(self, *args, **options):
        config = job_config(
            options,
            output_dir=options['out'],
            num_images=options['num'],
            workers=settings.DATAGEN['WORKERS'] if options['workers'] is None else options['workers'],
        )
        try:
            manifest, report = generate_dataset(config)
            digest = dataset_digest(config.output_dir)
        except (DatagenError, OSError) as exc:
            raise command_error(exc)

        if options['record']:
            GenerationRun.objects.create(
                kind=GenerationRun.KIND_GENERATE,
                spec_path=str(config.scene_spec_path),
                output_dir=str(config.output_dir),
                num_images=config.num_images,
                global_seed=str(config.global_seed),
                workers=config.workers,
                min_pixels=config.min_pixels,
                images_generated=report.images_generated,
                images_skipped=report.images_skipped,
                wall_seconds=report.wall_seconds,
                images_per_second=report.images_per_second,
                triangle_count_mean=report.triangle_count_mean,
                dataset_digest=digest,
            )

        logger.info(
            '%d images, %d annotations, %.1f images/s',
            report.images_generated, len(manifest.annotations), report.images_per_second,
        )
        self.stdout.write(digest)
        if report.images_skipped:
            raise CommandError(
                '{} image(s) skipped as unsatisfiable: {}'.format(report.images_skipped, report.skipped_indices),
                returncode=EXIT_UNSATISFIABLE,
            )
