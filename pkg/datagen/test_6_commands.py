import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from .cli import EXIT_IO, EXIT_SPEC, EXIT_UNSATISFIABLE, EXIT_USAGE, cli_main
from .models import GenerationRun

# サンプルのシーン定義
SAMPLE_SPEC = Path(__file__).resolve().parent / 'sample_specs' / 'tabletop' / 'scene.json'

# 小さな画像で動かすためのオプション
SMALL = ['--width', '48', '--height', '36', '--region', 'table_top']


def box_spec(**changes):
    # メッシュファイルを使わないシーン定義
    spec = {
        'room': {'width': 4.0, 'depth': 4.0, 'height': 2.5},
        'object_library': [{'class_id': 1, 'name': 'block', 'box': [0.1, 0.1, 0.1]}],
        'regions': [{'name': 'table', 'rect': [-0.5, -0.5, 0.5, 0.5], 'support_z': 0.7}],
        'objects_per_scene': [1, 3],
        'camera': {'radius_range': [1.0, 1.4], 'elevation_range_deg': [30.0, 60.0],
                   'fx': 40.0, 'fy': 40.0, 'width': 32, 'height': 24},
    }
    spec.update(changes)
    return spec


## ==================================================================
## validate-spec コマンド
## ==================================================================
class ValidateSpecCommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_spec(self, data, name='scene.json'):
        path = self.dir / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding='utf-8')
        return str(path)

    # サンプルのシーン定義が OK になる事を確認する
    def test_6_1_should_accept_sample_spec(self):
        out = StringIO()
        call_command('validate_spec', '--spec', str(SAMPLE_SPEC), stdout=out)
        self.assertIn('OK', out.getvalue())
        self.assertIn('3 classes', out.getvalue())

    # 部屋の外にある配置領域は終了コード 2 で領域名が示される事を確認する
    def test_6_2_should_reject_region_outside_room(self):
        path = self.write_spec(box_spec(regions=[{'name': 'garden', 'rect': [1.5, 1.5, 3.0, 3.0]}]))
        with self.assertRaises(CommandError) as ctx:
            call_command('validate_spec', '--spec', path)
        self.assertEqual(ctx.exception.returncode, EXIT_SPEC)
        self.assertIn('garden', str(ctx.exception))
        self.assertEqual(cli_main(['validate-spec', '--spec', path]), EXIT_SPEC)

    # JSON として読めないファイルは終了コード 2 で位置が示される事を確認する
    def test_6_3_should_reject_malformed_json(self):
        path = self.write_spec('{\n  "room": {"width": 4.0,,}\n}')
        with self.assertRaises(CommandError) as ctx:
            call_command('validate_spec', '--spec', path)
        self.assertEqual(ctx.exception.returncode, EXIT_SPEC)
        self.assertIn(':2:', str(ctx.exception))

    # 読めないメッシュファイルは終了コード 2 になる事を確認する
    def test_6_4_should_reject_missing_mesh(self):
        library = [{'class_id': 1, 'name': 'mug', 'mesh_path': 'meshes/missing.obj'}]
        path = self.write_spec(box_spec(object_library=library))
        with self.assertRaises(CommandError) as ctx:
            call_command('validate_spec', '--spec', path)
        self.assertEqual(ctx.exception.returncode, EXIT_SPEC)

    # 存在しないシーン定義ファイルは終了コード 3 になる事を確認する
    def test_6_5_should_fail_with_io_error_for_missing_spec(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('validate_spec', '--spec', str(self.dir / 'nothing.json'))
        self.assertEqual(ctx.exception.returncode, EXIT_IO)


## ==================================================================
## generate / preview コマンド
## ==================================================================
class GenerateCommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def generate(self, out, *extra):
        stdout = StringIO()
        call_command(
            'generate', '--spec', str(SAMPLE_SPEC), '--out', str(out), '--num', '10', '--seed', '7', *SMALL, *extra,
            stdout=stdout,
        )
        return stdout.getvalue().strip()

    # 同じ設定で 2 回生成するとダイジェストが一致する事を確認する
    def test_6_6_should_reproduce_digest(self):
        first = self.generate(self.dir / 'a')
        second = self.generate(self.dir / 'b', '--workers', '2')
        self.assertEqual(len(first), 64)
        self.assertEqual(first, second)
        manifest = json.loads((self.dir / 'a' / 'annotations.json').read_text(encoding='utf-8'))
        self.assertEqual(len(manifest['images']), 10)

    # --record で実行結果がデータベースに残る事を確認する
    def test_6_7_should_record_run(self):
        digest = self.generate(self.dir / 'a', '--record')
        run = GenerationRun.objects.get()
        self.assertEqual(run.kind, GenerationRun.KIND_GENERATE)
        self.assertEqual(run.dataset_digest, digest)
        self.assertEqual(run.images_generated, 10)
        self.assertEqual(int(run.global_seed), 7)

    # 不正なオプションは終了コード 1 になる事を確認する
    def test_6_8_should_reject_bad_options(self):
        for extra in (['--workers', '0'], ['--min-pixels', '0'], ['--width', '48']):
            with self.assertRaises(CommandError) as ctx:
                call_command('generate', '--spec', str(SAMPLE_SPEC), '--out', str(self.dir), '--num', '1', *extra)
            self.assertEqual(ctx.exception.returncode, EXIT_USAGE)

    # 物体を置けない画像があると終了コード 4 になる事を確認する
    def test_6_9_should_exit_unsatisfiable_when_images_are_skipped(self):
        spec = box_spec(
            object_library=[{'class_id': 1, 'name': 'crate', 'box': [0.9, 0.9, 0.9]}],
            objects_per_scene=[2, 2],
        )
        path = self.dir / 'crowded.json'
        path.write_text(json.dumps(spec), encoding='utf-8')
        with self.assertRaises(CommandError) as ctx:
            call_command('generate', '--spec', str(path), '--out', str(self.dir / 'out'), '--num', '1',
                         stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_UNSATISFIABLE)
        manifest = json.loads((self.dir / 'out' / 'annotations.json').read_text(encoding='utf-8'))
        self.assertEqual(manifest['images'], [])

    # preview が generate と同じ画像とシーンの説明を書き出す事を確認する
    def test_6_10_should_preview_same_bytes_as_generate(self):
        self.generate(self.dir / 'full')
        call_command(
            'preview', '--spec', str(SAMPLE_SPEC), '--out', str(self.dir / 'one'), '--index', '4', '--seed', '7',
            *SMALL, stdout=StringIO(),
        )
        for name in ('img_00000004.ppm', 'ids_00000004.pgm'):
            self.assertEqual((self.dir / 'one' / name).read_bytes(), (self.dir / 'full' / name).read_bytes())
        scene = json.loads((self.dir / 'one' / 'scene_00000004.json').read_text(encoding='utf-8'))
        self.assertEqual(scene['region'], 'table_top')
        preview = json.loads((self.dir / 'one' / 'preview_00000004.json').read_text(encoding='utf-8'))
        self.assertEqual(preview['images'][0]['file_name'], 'img_00000004.ppm')
        self.assertEqual(preview['images'][0]['id'], 4)
        self.assertTrue(all(a['image_id'] == 4 for a in preview['annotations']))


## ==================================================================
## bench コマンドと python -m datagen
## ==================================================================
class BenchCommandTests(TestCase):

    # bench が計測結果を JSON で出力し、--record で記録される事を確認する
    def test_6_11_should_print_report_json(self):
        out = StringIO()
        call_command('bench', '--num', '2', '--width', '32', '--height', '24', '--objects', '3', '--record', stdout=out)
        report = json.loads(out.getvalue())
        for key in ('images_generated', 'wall_seconds', 'images_per_second', 'per_worker_image_counts',
                    'triangle_count_mean', 'ms_per_image_median'):
            self.assertIn(key, report)
        self.assertEqual(report['images_generated'] + report['images_skipped'], 2)
        self.assertEqual(GenerationRun.objects.get().kind, GenerationRun.KIND_BENCH)

    # 不正なサブコマンドや引数不足は終了コード 1 になる事を確認する
    def test_6_12_should_exit_usage_for_bad_invocation(self):
        self.assertEqual(cli_main([]), EXIT_USAGE)
        self.assertEqual(cli_main(['render-everything']), EXIT_USAGE)
        self.assertEqual(cli_main(['generate']), EXIT_USAGE)
        self.assertEqual(cli_main(['bench', '--workers', '0', '--num', '1']), EXIT_USAGE)

    # python -m datagen validate-spec が成功時に 0 を返す事を確認する
    def test_6_13_should_exit_ok_for_valid_spec(self):
        self.assertEqual(cli_main(['validate-spec', '--spec', str(SAMPLE_SPEC)]), 0)
