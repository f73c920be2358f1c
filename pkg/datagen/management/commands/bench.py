from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from datagen.cli import EXIT_USAGE
from datagen.models import GenerationRun
from datagen.pipeline import report_json, run_bench


class Command(BaseCommand):
    help = 'Generate images of a fixed synthetic scene and print the ThroughputReport as JSON.'

    def add_arguments(self, parser):
        defaults = settings.DATAGEN
        parser.add_argument('--workers', type=int, default=defaults['WORKERS'])
        parser.add_argument('--num', type=int, default=defaults['BENCH_IMAGES'])
        parser.add_argument('--width', type=int, default=defaults['BENCH_WIDTH'])
        parser.add_argument('--height', type=int, default=defaults['BENCH_HEIGHT'])
        parser.add_argument('--objects', type=int, default=defaults['BENCH_OBJECTS'])
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--record', action='store_true', help='store the run in the database')

    def handle(self, *args, **options):
        try:
            report = run_bench(
                workers=options['workers'],
                num_images=options['num'],
                width=options['width'],
                height=options['height'],
                objects=options['objects'],
                global_seed=options['seed'],
            )
        except ValueError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE)
        if options['record']:
            GenerationRun.objects.create(
                kind=GenerationRun.KIND_BENCH,
                num_images=options['num'],
                global_seed=str(options['seed']),
                workers=options['workers'],
                min_pixels=settings.DATAGEN['MIN_PIXELS'],
                images_generated=report.images_generated,
                images_skipped=report.images_skipped,
                wall_seconds=report.wall_seconds,
                images_per_second=report.images_per_second,
                triangle_count_mean=report.triangle_count_mean,
            )
        self.stdout.write(report_json(report).decode('utf-8').rstrip('\n'))
