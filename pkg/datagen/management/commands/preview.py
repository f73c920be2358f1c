from pathlib import Path

from django.core.management.base import BaseCommand

from datagen.annotate import build_manifest
from datagen.cli import command_error
from datagen.exceptions import DatagenError
from datagen.pipeline import generate_image, manifest_json, render_json, write_atomic, write_image_files
from datagen.specfile import load_scene_spec

from ._options import add_job_arguments, job_config


class Command(BaseCommand):
    help = 'Render a single image of a dataset (same bytes as generate) plus a JSON description of its scene.'

    def add_arguments(self, parser):
        add_job_arguments(parser)
        parser.add_argument('--out', required=True, help='output directory')
        parser.add_argument('--index', type=int, required=True, help='image index')

    def handle(self, *args, **options):
        config = job_config(options, output_dir=options['out'])
        index = options['index']
        out = Path(config.output_dir)
        try:
            spec = load_scene_spec(config.scene_spec_path)
            image = generate_image(spec, index, config)
            out.mkdir(parents=True, exist_ok=True)
            write_image_files(image, out)
            manifest = build_manifest([image.annotations], config.effective_spec(spec).categories)
            write_atomic(out / 'scene_{:08d}.json'.format(index), render_json(image.scene.to_dict()))
            write_atomic(out / 'preview_{:08d}.json'.format(index), manifest_json(manifest))
        except (DatagenError, OSError) as exc:
            raise command_error(exc)
        self.stdout.write('{} ({} annotations, {} triangles)'.format(
            out / image.image_file, len(image.annotations.instances), image.triangle_count,
        ))
