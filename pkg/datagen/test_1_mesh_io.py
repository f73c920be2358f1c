import io
import math
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from .exceptions import (
    DegenerateFace,
    EmptyMesh,
    IndexOutOfRange,
    InvalidGeometry,
    MalformedNumber,
    NonPositiveExtent,
)
from .mesh_io import (
    Aabb,
    TriangleMesh,
    compute_aabb,
    dump_obj,
    load_obj,
    make_box,
    make_grid,
    make_quad,
    parse_obj,
    transformed,
)
from .transforms import Pose

# テストで使う OBJ ファイルの置き場所
TESTDATA = Path(__file__).resolve().parent / 'testdata'


def rotation_oracle(q):
    # 四元数から回転行列を作る (mesh_io とは別に書いた参照実装)
    w, x, y, z = q
    return np.array([
        [w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z],
    ])


## ==================================================================
## OBJ ファイルの読み込み
## ==================================================================
class ParseObjTests(SimpleTestCase):

    # 最小の OBJ ファイルが 3 頂点 1 面になる事を確認する
    def test_1_1_should_parse_minimal_file(self):
        mesh = parse_obj('v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3')
        self.assertEqual(mesh.vertices.shape, (3, 3))
        self.assertEqual(mesh.faces.tolist(), [[0, 1, 2]])
        self.assertIsNone(mesh.normals)
        np.testing.assert_array_equal(load_obj(TESTDATA / 'minimal.obj').faces, mesh.faces)

    # 四角形 6 面の立方体が 12 三角形になる事を確認する
    def test_1_2_should_fan_triangulate_quads(self):
        mesh = load_obj(TESTDATA / 'cube_quads.obj')
        self.assertEqual(len(mesh.vertices), 8)
        self.assertEqual(mesh.triangle_count, 12)

    # 三角形の数が Σ(各面の頂点数 - 2) と一致する事を確認する
    def test_1_3_should_follow_fan_law_for_mixed_index_forms(self):
        path = TESTDATA / 'mixed_forms.obj'
        expected = 0
        for line in path.read_text(encoding='utf-8').splitlines():
            tokens = line.split()
            if tokens and tokens[0] == 'f':
                expected += len(tokens) - 3
        mesh = load_obj(path)
        self.assertEqual(mesh.triangle_count, expected)
        self.assertEqual(mesh.triangle_count, 5)
        # 扇形分割は最初の頂点を中心にする
        self.assertEqual(mesh.faces[:3].tolist(), [[0, 1, 2], [0, 2, 3], [0, 3, 4]])
        # 法線を持たない頂点があるので法線は付かない
        self.assertIsNone(mesh.normals)

    # 全頂点に法線がある時は正規化された頂点法線が付く事を確認する
    def test_1_4_should_attach_normalized_vertex_normals(self):
        text = 'v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 3\nf 1//1 2//1 3//1\n'
        mesh = parse_obj(text)
        self.assertEqual(mesh.normals.tolist(), [[0.0, 0.0, 1.0]] * 3)

    # CRLF の改行でも読み込める事を確認する
    def test_1_5_should_accept_crlf_files(self):
        self.assertIn(b'\r\n', (TESTDATA / 'crlf_quad.obj').read_bytes())
        mesh = load_obj(TESTDATA / 'crlf_quad.obj')
        self.assertEqual(mesh.triangle_count, 2)

    # テキストストリームからも読み込める事を確認する
    def test_1_6_should_parse_text_stream(self):
        mesh = parse_obj(io.StringIO('v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n'), name='stream')
        self.assertEqual(mesh.name, 'stream')
        self.assertEqual(mesh.triangle_count, 1)

    # 範囲外の頂点インデックスがエラーになる事を確認する
    def test_1_7_should_reject_index_out_of_range(self):
        with self.assertRaises(IndexOutOfRange):
            parse_obj('v 0 0 0\nf 1 2 3')
        with self.assertRaises(IndexOutOfRange):
            load_obj(TESTDATA / 'bad_index.obj')
        with self.assertRaises(IndexOutOfRange):
            parse_obj('v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2')

    # 数値として読めない座標がエラーになり、行番号が分かる事を確認する
    def test_1_8_should_reject_malformed_number(self):
        with self.assertRaises(MalformedNumber) as ctx:
            load_obj(TESTDATA / 'bad_number.obj')
        self.assertEqual(ctx.exception.line, 2)
        # 小数点はピリオドのみ
        with self.assertRaises(MalformedNumber):
            parse_obj('v 0,5 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3')
        # 負のインデックスは扱わない
        with self.assertRaises(MalformedNumber):
            load_obj(TESTDATA / 'negative_index.obj')

    # 頂点が 3 つ未満の面がエラーになる事を確認する
    def test_1_9_should_reject_degenerate_face(self):
        with self.assertRaises(DegenerateFace):
            load_obj(TESTDATA / 'degenerate_face.obj')

    # 面が一つもないファイルがエラーになる事を確認する
    def test_1_10_should_reject_empty_mesh(self):
        with self.assertRaises(EmptyMesh):
            load_obj(TESTDATA / 'empty.obj')
        with self.assertRaises(EmptyMesh):
            parse_obj('# only a comment\n')

    # 書き出した OBJ を読み直すと同じメッシュになる事を確認する
    def test_1_11_should_reload_dumped_mesh(self):
        for mesh in (load_obj(TESTDATA / 'mixed_forms.obj'), make_grid(1.5, 0.5, (3, 2))):
            again = parse_obj(dump_obj(mesh), name=mesh.name)
            np.testing.assert_array_equal(again.vertices, mesh.vertices)
            np.testing.assert_array_equal(again.faces, mesh.faces)
            if mesh.normals is None:
                self.assertIsNone(again.normals)
            else:
                np.testing.assert_allclose(again.normals, mesh.normals, atol=1e-12)


## ==================================================================
## メッシュの不変条件とプリミティブ
## ==================================================================
class MeshPrimitiveTests(SimpleTestCase):

    # 箱が 8 頂点 12 面で原点中心になる事を確認する
    def test_1_12_should_make_unit_box(self):
        box = make_box((1, 1, 1))
        self.assertEqual(len(box.vertices), 8)
        self.assertEqual(box.triangle_count, 12)
        aabb = compute_aabb(box)
        self.assertEqual(aabb.min, (-0.5, -0.5, -0.5))
        self.assertEqual(aabb.max, (0.5, 0.5, 0.5))

    # 箱の面法線が外向きになる事を確認する
    def test_1_13_should_wind_box_faces_outward(self):
        box = make_box((0.4, 0.2, 0.6))
        for tri in box.triangles():
            normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
            self.assertGreater(normal @ tri.mean(axis=0), 0.0)

    # 四角形が 4 頂点 2 面になる事を確認する
    def test_1_14_should_make_quad(self):
        quad = make_quad(2, 2)
        self.assertEqual(len(quad.vertices), 4)
        self.assertEqual(quad.triangle_count, 2)
        self.assertEqual(compute_aabb(quad).extents, (2.0, 2.0, 0.0))

    # 分割した四角形が同じ大きさで面数だけ増える事を確認する
    def test_1_15_should_tile_grid(self):
        grid = make_grid(3.0, 2.0, (3, 2))
        self.assertEqual(len(grid.vertices), 12)
        self.assertEqual(grid.triangle_count, 12)
        self.assertEqual(compute_aabb(grid).extents, (3.0, 2.0, 0.0))
        for tri in grid.triangles():
            self.assertGreater(np.cross(tri[1] - tri[0], tri[2] - tri[0])[2], 0.0)

    # 大きさが 0 以下の箱・四角形がエラーになる事を確認する
    def test_1_16_should_reject_non_positive_extent(self):
        with self.assertRaises(NonPositiveExtent):
            make_box((0, 1, 1))
        with self.assertRaises(NonPositiveExtent):
            make_quad(1, -1)
        with self.assertRaises(NonPositiveExtent):
            make_grid(1, 1, 0)

    # 不変条件を満たさないメッシュが作れない事を確認する
    def test_1_17_should_enforce_mesh_invariants(self):
        with self.assertRaises(InvalidGeometry):
            TriangleMesh('bad', [[0, 0, 0], [1, 0, 0]], [[0, 1, 2]])
        with self.assertRaises(InvalidGeometry):
            TriangleMesh('bad', [[0, 0, math.inf], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        with self.assertRaises(InvalidGeometry):
            TriangleMesh('bad', [[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]], normals=[[0, 0, 2]] * 3)
        # 頂点配列は書き換えられない
        mesh = make_box((1, 1, 1))
        with self.assertRaises(ValueError):
            mesh.vertices[0, 0] = 5.0

    # 姿勢を焼き込んだメッシュの法線も回転する事を確認する
    def test_1_18_should_rotate_normals_when_transformed(self):
        stand = Pose(rotation=(math.cos(math.pi / 4), math.sin(math.pi / 4), 0.0, 0.0))
        wall = transformed(make_quad(1, 1), stand, name='wall')
        np.testing.assert_allclose(wall.normals, [[0.0, -1.0, 0.0]] * 4, atol=1e-12)


## ==================================================================
## 軸平行境界箱 (Aabb)
## ==================================================================
class AabbTests(SimpleTestCase):

    # 45 度回転した単位立方体の境界箱を確認する
    def test_1_19_should_bound_yawed_box(self):
        aabb = compute_aabb(make_box((1, 1, 1)), Pose.from_yaw(math.radians(45.0)))
        half = math.sqrt(2.0) / 2.0
        for lo, hi in zip(aabb.min[:2], aabb.max[:2]):
            self.assertAlmostEqual(lo, -half, delta=1e-4)
            self.assertAlmostEqual(hi, half, delta=1e-4)
        self.assertAlmostEqual(aabb.min[2], -0.5, delta=1e-12)
        self.assertAlmostEqual(aabb.max[2], 0.5, delta=1e-12)

    # 平行移動した三角形の境界箱を確認する
    def test_1_20_should_translate_bounds(self):
        mesh = TriangleMesh('point', [[1, 2, 3], [1, 2, 3], [1, 2, 3]], [[0, 1, 2]])
        aabb = compute_aabb(mesh, Pose(translation=(10, 0, 0)))
        self.assertEqual(aabb.min, (11.0, 2.0, 3.0))
        self.assertEqual(aabb.max, (11.0, 2.0, 3.0))

    # 100 個のランダムな姿勢で境界箱が変換後の頂点の最小・最大と一致する事を確認する
    def test_1_21_should_match_corner_transform_oracle(self):
        rng = np.random.default_rng(2024)
        mesh = load_obj(TESTDATA / 'mixed_forms.obj')
        for _ in range(100):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            t = rng.uniform(-5.0, 5.0, size=3)
            aabb = compute_aabb(mesh, Pose(translation=tuple(t), rotation=tuple(q)))
            points = mesh.vertices @ rotation_oracle(q).T + t
            np.testing.assert_allclose(aabb.min, points.min(axis=0), atol=1e-9)
            np.testing.assert_allclose(aabb.max, points.max(axis=0), atol=1e-9)

    # 接している箱は重なりとみなし、離れていれば重ならない事を確認する
    def test_1_22_should_treat_touching_boxes_as_overlapping(self):
        a = Aabb((0, 0, 0), (1, 1, 1))
        self.assertTrue(a.intersects(Aabb((1, 0, 0), (2, 1, 1))))
        self.assertFalse(a.intersects(Aabb((1.001, 0, 0), (2, 1, 1))))
        self.assertTrue(a.footprint_inside((0, 0, 1, 1)))
        self.assertFalse(a.translated((0.5, 0, 0)).footprint_inside((0, 0, 1, 1)))

    # min が max を超える箱が作れない事を確認する
    def test_1_23_should_reject_inverted_bounds(self):
        with self.assertRaises(InvalidGeometry):
            Aabb((1, 0, 0), (0, 1, 1))
