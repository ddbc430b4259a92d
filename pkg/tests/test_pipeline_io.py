# -*- coding: utf-8 -*-
import json

import numpy as np
import pytest

from conftest import square
from lensedel.cam.cam_extent import ClassWeights, FeatureMap, ImagePolygon
from lensedel.errors import SchemaError, ShapeMismatchError
from lensedel.geocore.geodetic import GeoPoint, enu_origin, enu_to_geodetic_array
from lensedel.geocore.polygons import MultiPolygon2D, Polygon2D, multipolygon_area, ring_signed_area
from lensedel.pipeline import pipeline_io as io
from lensedel.sfm.homography import GeorefResult, Homography

ORIGIN = GeoPoint(48.71, 2.17, 120.0)


def test_reconstruction_round_trip(scene, tmp_path):
    path = tmp_path / 'recon.json'
    io.save_reconstruction(scene.reconstruction, path)
    loaded = io.load_reconstruction(path)
    recon = scene.reconstruction
    assert loaded.origin == recon.origin
    assert sorted(loaded.shots) == sorted(recon.shots)
    for k, shot in recon.shots.items():
        assert loaded.shots[k].rotation == shot.rotation
        assert np.array_equal(loaded.shots[k].translation, shot.translation)
        assert loaded.shots[k].gps == shot.gps
        assert np.array_equal(loaded.observations_of(k).pixels, recon.observations_of(k).pixels)
    assert np.array_equal(loaded.points, recon.points)


def test_reconstruction_without_origin_is_anchored_at_the_tags(scene):
    data = io.reconstruction_to_dict(scene.reconstruction)
    del data['origin']
    recon = io.reconstruction_from_dict(data)
    tags = [scene.reconstruction.shots[k].gps for k in sorted(scene.reconstruction.shots)]
    assert recon.origin == enu_origin(tags)


def test_reconstruction_without_origin_nor_tags(scene):
    data = io.reconstruction_to_dict(scene.reconstruction)
    del data['origin']
    for shot in data['shots'].values():
        shot['gps'] = None
    with pytest.raises(SchemaError) as err:
        io.reconstruction_from_dict(data)
    assert err.value.field == 'origin'


def test_truncated_reconstruction_reports_line(scene, tmp_path):
    path = tmp_path / 'recon.json'
    io.save_reconstruction(scene.reconstruction, path)
    text = path.read_text(encoding='utf-8')
    path.write_text(text[:len(text) // 2], encoding='utf-8')
    with pytest.raises(SchemaError) as info:
        io.load_reconstruction(path)
    assert info.value.line is not None
    assert info.value.path == str(path)


def test_missing_field_is_named(scene, tmp_path):
    data = io.reconstruction_to_dict(scene.reconstruction)
    shot_id = sorted(data['shots'])[0]
    del data['shots'][shot_id]['t']
    path = tmp_path / 'recon.json'
    io.write_json(path, data)
    with pytest.raises(SchemaError) as info:
        io.load_reconstruction(path)
    assert info.value.field == f'shots.{shot_id}.t'


def test_dangling_point_index(scene, tmp_path):
    data = io.reconstruction_to_dict(scene.reconstruction)
    shot_id = next(k for k, rows in sorted(data['observations'].items()) if rows)
    data['observations'][shot_id][0][2] = len(data['points'])
    with pytest.raises(SchemaError, match='dangling'):
        io.reconstruction_from_dict(data)


def test_non_unit_quaternion(scene):
    data = io.reconstruction_to_dict(scene.reconstruction)
    shot_id = sorted(data['shots'])[0]
    data['shots'][shot_id]['q'] = [1.0, 1.0, 0.0, 0.0]
    with pytest.raises(SchemaError) as info:
        io.reconstruction_from_dict(data)
    assert info.value.field == f'shots.{shot_id}.q'


def test_tensor_round_trip_is_bit_exact(tmp_path):
    values = np.random.default_rng(0).standard_normal((3, 7, 5)).astype(np.float32)
    io.save_tensor(FeatureMap(values), tmp_path / 'f.delt')
    loaded = io.load_tensor(tmp_path / 'f.delt')
    assert loaded.values.dtype == np.float32
    assert np.array_equal(loaded.values, values)
    raw = (tmp_path / 'f.delt').read_bytes()
    assert raw[:4] == b'DELT' and len(raw) == 16 + 4 * 3 * 7 * 5


def test_smallest_tensor(tmp_path):
    io.save_tensor(FeatureMap(np.full((1, 1, 1), 2.5)), tmp_path / 'f.delt')
    assert io.load_tensor(tmp_path / 'f.delt').values.shape == (1, 1, 1)


def test_tensor_payload_mismatch(tmp_path):
    path = tmp_path / 'f.delt'
    path.write_bytes(io.TENSOR_HEADER.pack(b'DELT', 2, 2, 2) + np.zeros(4, dtype='<f4').tobytes())
    with pytest.raises(ShapeMismatchError):
        io.load_tensor(path)


@pytest.mark.parametrize('raw', [b'DEL', io.TENSOR_HEADER.pack(b'XXXX', 1, 1, 1) + b'\0' * 4,
                                 io.TENSOR_HEADER.pack(b'DELT', 0, 1, 1)])
def test_malformed_tensor(tmp_path, raw):
    path = tmp_path / 'f.delt'
    path.write_bytes(raw)
    with pytest.raises(SchemaError):
        io.load_tensor(path)


def test_non_finite_tensor(tmp_path):
    path = tmp_path / 'f.delt'
    path.write_bytes(io.TENSOR_HEADER.pack(b'DELT', 1, 1, 2) + np.array([1.0, np.nan], dtype='<f4').tobytes())
    with pytest.raises(SchemaError):
        io.load_tensor(path)


def test_weights(tmp_path):
    io.save_weights(ClassWeights([1.0, -2.0, 0.5]), tmp_path / 'w.delt')
    assert io.load_weights(tmp_path / 'w.delt').values.tolist() == [1.0, -2.0, 0.5]
    io.save_tensor(FeatureMap(np.ones((3, 2, 2))), tmp_path / 'f.delt')
    with pytest.raises(ShapeMismatchError):
        io.load_weights(tmp_path / 'f.delt')


def test_write_pgm(tmp_path):
    io.write_pgm(np.array([[1, 0, 0], [0, 1, 1]], dtype=bool), tmp_path / 'm.pgm')
    assert (tmp_path / 'm.pgm').read_text() == 'P2\n3 2\n255\n255 0 0\n0 255 255\n'


def test_geojson_polygons(tmp_path):
    region = MultiPolygon2D((square(0, 0, 400, 300), square(1000, 1000, 1200, 1100)))
    io.write_geojson(tmp_path / 'r.geojson', [(region, {'name': 'flood'})], ORIGIN)
    data = json.loads((tmp_path / 'r.geojson').read_text())
    geometry = data['features'][0]['geometry']
    assert geometry['type'] == 'MultiPolygon'
    for polygon in geometry['coordinates']:
        ring = np.array(polygon[0])
        assert ring[0].tolist() == ring[-1].tolist()
        assert ring_signed_area(ring[:-1]) > 0
    loaded = io.read_geojson(tmp_path / 'r.geojson', ORIGIN)
    assert multipolygon_area(loaded) == pytest.approx(400 * 300 + 200 * 100, rel=1e-6)


def test_geojson_holes_are_clockwise(tmp_path):
    ring = np.array([[0, 0], [100, 0], [100, 100], [0, 100]], dtype=float)
    hole = np.array([[40, 40], [60, 40], [60, 60], [40, 60]], dtype=float)
    io.write_geojson(tmp_path / 'r.geojson', [(Polygon2D(ring, (hole,)), {})], ORIGIN)
    rings = json.loads((tmp_path / 'r.geojson').read_text())['features'][0]['geometry']['coordinates'][0]
    assert ring_signed_area(np.array(rings[1])[:-1]) < 0
    loaded = io.read_geojson(tmp_path / 'r.geojson', ORIGIN)
    assert multipolygon_area(loaded) == pytest.approx(100 * 100 - 20 * 20, rel=1e-6)


def test_geojson_points(tmp_path):
    io.write_geojson(tmp_path / 'p.geojson', [((120.0, -45.0), {'image_id': 'a'}),
                                              ((-3.0, 8.0), {'image_id': 'b'})], ORIGIN)
    points = io.read_geojson_points(tmp_path / 'p.geojson', ORIGIN)
    assert points['a'] == pytest.approx((120.0, -45.0), abs=1e-3)
    assert points['b'] == pytest.approx((-3.0, 8.0), abs=1e-3)


def test_geojson_short_ring(tmp_path):
    path = tmp_path / 'r.geojson'
    io.write_json(path, {'type': 'Polygon', 'coordinates': [[[2.17, 48.71], [2.18, 48.71], [2.17, 48.71]]]})
    with pytest.raises(SchemaError) as info:
        io.read_geojson(path, ORIGIN)
    assert info.value.field.endswith('coordinates[0]')


def test_geojson_features_keep_properties(tmp_path):
    io.write_geojson(tmp_path / 'r.geojson', [(square(0, 0, 10, 10), {'image_id': 'a', 'retained': True})],
                     ORIGIN)
    ((region, props),) = io.read_geojson_features(tmp_path / 'r.geojson', ORIGIN)
    assert props == {'image_id': 'a', 'retained': True}
    assert multipolygon_area(region) == pytest.approx(100.0, rel=1e-6)


def test_geojson_coordinates_are_not_rounded(tmp_path):
    io.write_geojson(tmp_path / 'p.geojson', [((123.456789, -98.7654321), {})], ORIGIN, 3.5)
    lat, lon, _ = enu_to_geodetic_array([123.456789], [-98.7654321], [3.5], ORIGIN)
    data = json.loads((tmp_path / 'p.geojson').read_text())
    assert data['features'][0]['geometry']['coordinates'] == [float(lon[0]), float(lat[0])]


def test_metadata(tmp_path):
    path = tmp_path / 'meta.csv'
    path.write_text('image_id,lat,lon,flood\na,48.7,2.1,1\nb,48.8,2.2,0\nc,48.9,2.3,\n')
    meta = io.load_metadata(path)
    assert [meta[k].flood for k in 'abc'] == [True, False, None]
    assert meta['b'].gps == GeoPoint(48.8, 2.2, 0.0)


def test_metadata_round_trip(scene, tmp_path):
    io.write_metadata(scene.metadata, tmp_path / 'meta.csv')
    meta = io.load_metadata(tmp_path / 'meta.csv')
    assert meta == {m.image_id: m for m in scene.metadata}


@pytest.mark.parametrize('rows, line, field', [
    ('a,48.7,2.1\na,48.8,2.2\n', 3, 'image_id'),
    ('a,48.7,2.1\nb,north,2.2\n', 3, 'lat'),
    ('a,48.7,2.1\nb,48.8,2.2\nc,95.0,2.3\n', 4, 'lat/lon'),
])
def test_metadata_errors_report_line(tmp_path, rows, line, field):
    path = tmp_path / 'meta.csv'
    path.write_text('image_id,lat,lon\n' + rows)
    with pytest.raises(SchemaError) as info:
        io.load_metadata(path)
    assert (info.value.line, info.value.field) == (line, field)


def test_metadata_missing_column(tmp_path):
    path = tmp_path / 'meta.csv'
    path.write_text('image_id,lat\na,48.7\n')
    with pytest.raises(SchemaError, match='missing column'):
        io.load_metadata(path)


def test_votes(tmp_path):
    path = tmp_path / 'votes.csv'
    path.write_text('image_id,B,w\na,2,3\nb,0,1\n')
    assert [(r.image_id, r.positive, r.workers) for r in io.load_votes(path)] == [('a', 2, 3), ('b', 0, 1)]
    path.write_text('image_id,B,w\na,2,3\nb,4,3\n')
    with pytest.raises(SchemaError) as info:
        io.load_votes(path)
    assert info.value.line == 3


def test_labels(tmp_path):
    io.write_labels({'b': True, 'a': False}, tmp_path / 'labels.csv')
    assert (tmp_path / 'labels.csv').read_text() == 'image_id,label\na,0\nb,1\n'


def test_georef_round_trip(tmp_path):
    h = Homography(np.array([[2.0, 0.1, 5.0], [0.0, 1.5, -3.0], [0.0, 0.001, 1.0]]))
    io.save_georef({'a': GeorefResult('a', h, 0.75, 30, 1.25)}, {'a': False}, tmp_path / 'georef.json')
    ((image_id, (result, retained)),) = io.load_georef(tmp_path / 'georef.json').items()
    assert image_id == 'a' and not retained
    assert np.allclose(result.homography.matrix, h.matrix, atol=1e-15)
    assert (result.inlier_ratio, result.inlier_count, result.rms_error) == (0.75, 30, 1.25)


def test_image_polygons_round_trip(tmp_path):
    io.save_image_polygons({'a': [ImagePolygon(square(0, 0, 2, 3), 6)], 'b': []}, tmp_path / 'p.json')
    loaded = io.load_image_polygons(tmp_path / 'p.json')
    assert loaded['b'] == []
    assert np.array_equal(loaded['a'][0].polygon.exterior, square(0, 0, 2, 3).exterior)
    assert loaded['a'][0].pixel_area == 6
