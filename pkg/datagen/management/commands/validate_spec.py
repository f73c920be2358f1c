from django.core.management.base import BaseCommand

from datagen.cli import command_error
from datagen.exceptions import DatagenError
from datagen.specfile import load_scene_spec


class Command(BaseCommand):
    help = 'Parse a scene-spec file, load its meshes and run the semantic checks.'

    def add_arguments(self, parser):
        parser.add_argument('--spec', required=True, help='scene-spec JSON file')

    def handle(self, *args, **options):
        try:
            spec = load_scene_spec(options['spec'])
        except DatagenError as exc:
            raise command_error(exc)
        self.stdout.write('{}: OK ({} classes, {} regions, {} furniture pieces, {}x{} images)'.format(
            options['spec'], len(spec.library), len(spec.regions), len(spec.furniture),
            spec.camera.width, spec.camera.height,
        ))
