# -*- coding: utf-8 -*-
"""pipeline_io file.

File containing the readers and writers of the pipeline files:

* reconstruction: JSON document (origin, cameras, shots, points, observations),
* feature maps and class weights: binary tensors (``DELT`` header, float32 payload),
* regions: RFC 7946 GeoJSON feature collections, [lon, lat] coordinates,
* image metadata and worker votes: CSV tables,
* masks: plain-text portable graymap (P2), for debugging.

Loaders reject malformed input, they never repair it.

.. module:: pipeline_io
   :synopsis: file formats of the pipeline.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from lensedel.cam.cam_extent import ClassWeights, FeatureMap, ImagePolygon
from lensedel.errors import InvalidInputError, LenseDelError, SchemaError, ShapeMismatchError
from lensedel.flood.label_agg import VoteRecord
from lensedel.geocore.geodetic import GeoPoint, enu_origin, enu_to_geodetic_array, geodetic_to_enu_array
from lensedel.geocore.polygons import (MultiPolygon2D, Polygon2D, ring_signed_area,
                                       to_shapely, from_shapely)
from lensedel.sfm.homography import GeorefResult, Homography
from lensedel.sfm.reconstruction import CameraModel, Observations, Reconstruction, Shot

logger = logging.getLogger(__name__)

TENSOR_MAGIC = b'DELT'
TENSOR_HEADER = struct.Struct('<4sIII')

PathLike = Union[str, Path]
Geometry = Union[Polygon2D, MultiPolygon2D, Tuple[float, float]]


def write_json(path: PathLike, payload) -> None:
    """Write a JSON document with sorted keys, so that equal payloads give equal bytes."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, sort_keys=True, indent=2, separators=(",", ": "))
    Path(path).write_text(text + '\n', encoding='utf-8')


def read_json(path: PathLike):
    """Read a JSON document, decoding errors reported with their line."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise SchemaError(f'cannot read file ({e.strerror})', path=str(path)) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f'invalid JSON ({e.msg})', path=str(path), line=e.lineno) from e


# Reconstruction

def _get(obj, key, where: str):
    if not isinstance(obj, dict):
        raise SchemaError('object expected', field=where or None)
    if key not in obj:
        raise SchemaError('missing field', field=f'{where}.{key}' if where else key)
    return obj[key]


def _mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError('object expected', field=where)
    return value


def _floats(value, length: Optional[int], where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError('numbers expected', field=where) from None
    if length is not None and arr.shape != (length,):
        raise SchemaError(f'{length} numbers expected', field=where)
    if not np.all(np.isfinite(arr)):
        raise SchemaError('non-finite number', field=where)
    return arr


def _geopoint(obj, where: str) -> GeoPoint:
    lat, lon = _get(obj, 'lat', where), _get(obj, 'lon', where)
    try:
        return GeoPoint(float(lat), float(lon), float(obj.get('alt', 0.0)))
    except (TypeError, ValueError) as e:
        raise SchemaError(str(e), field=where) from e


def reconstruction_from_dict(data) -> Reconstruction:
    """Build a :class:`Reconstruction` from its JSON object, all the invariants checked.

    Without an ``origin``, the ENU frame is anchored at the centroid of the GPS
    tags of the shots (see :func:`~lensedel.geocore.geodetic.enu_origin`).
    """
    if not isinstance(data, dict):
        raise SchemaError('object expected')
    origin = _geopoint(data['origin'], 'origin') if data.get('origin') is not None else None
    cameras = {}
    for cam_id, c in _mapping(_get(data, 'cameras', ''), 'cameras').items():
        where = f'cameras.{cam_id}'
        values = [_get(c, key, where) for key in ('width', 'height', 'focal_px', 'cx', 'cy')]
        try:
            cameras[str(cam_id)] = CameraModel(int(values[0]), int(values[1]), float(values[2]),
                                               float(values[3]), float(values[4]))
        except (TypeError, ValueError) as e:
            raise SchemaError(str(e), field=where) from e
    shots = {}
    for shot_id, s in _mapping(_get(data, 'shots', ''), 'shots').items():
        where = f'shots.{shot_id}'
        q = _floats(_get(s, 'q', where), 4, f'{where}.q')
        t = _floats(_get(s, 't', where), 3, f'{where}.t')
        gps = _geopoint(s['gps'], f'{where}.gps') if s.get('gps') is not None else None
        try:
            shots[str(shot_id)] = Shot(str(shot_id), tuple(q), t, str(_get(s, 'camera', where)), gps)
        except InvalidInputError as e:
            raise SchemaError(str(e), field=f'{where}.q') from e
    if origin is None:
        tags = [s.gps for _, s in sorted(shots.items()) if s.gps is not None]
        if not tags:
            raise SchemaError('no origin and no GPS tag to anchor the ENU frame', field='origin')
        origin = enu_origin(tags)
    points = _floats(_get(data, 'points', ''), None, 'points')
    if points.ndim != 2 or points.shape[1] != 3:
        raise SchemaError('list of [x, y, z] expected', field='points')
    observations = {}
    for shot_id, rows in _mapping(data.get('observations', {}), 'observations').items():
        where = f'observations.{shot_id}'
        arr = _floats(rows, None, where)
        if arr.size == 0:
            arr = np.empty((0, 3))
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise SchemaError('list of [u, v, point_index] expected', field=where)
        idx = arr[:, 2]
        if np.any(idx != np.round(idx)):
            raise SchemaError('point index must be an integer', field=where)
        observations[str(shot_id)] = Observations(arr[:, :2], idx.astype(np.int64))
    return Reconstruction(origin, cameras, shots, points, observations)


def load_reconstruction(path: PathLike) -> Reconstruction:
    """Load a reconstruction file.

    :param path: JSON reconstruction.
    :type path: str or pathlib.Path
    :return: validated reconstruction.
    :rtype: Reconstruction
    :raises SchemaError: malformed file, with the offending line or field.
    """
    data = read_json(path)
    try:
        recon = reconstruction_from_dict(data)
    except SchemaError as e:
        raise SchemaError(e.message, path=str(path), field=e.field, line=e.line) from e
    logger.info('%s: %d shots, %d points', path, len(recon.shots), len(recon.points))
    return recon


def reconstruction_to_dict(recon: Reconstruction) -> dict:
    def geo(p: GeoPoint) -> dict:
        return {'lat': p.lat, 'lon': p.lon, 'alt': p.alt}

    shots = {}
    for shot_id in sorted(recon.shots):
        s = recon.shots[shot_id]
        shots[shot_id] = {'camera': s.camera_id, 'q': list(s.rotation), 't': s.translation.tolist(),
                          'gps': geo(s.gps) if s.gps is not None else None}
    return {
        'origin': geo(recon.origin),
        'cameras': {k: {'width': c.width, 'height': c.height, 'focal_px': c.focal, 'cx': c.cx, 'cy': c.cy}
                    for k, c in sorted(recon.cameras.items())},
        'shots': shots,
        'points': recon.points.tolist(),
        'observations': {k: [[float(u), float(v), int(i)] for (u, v), i in zip(o.pixels, o.point_ids)]
                         for k, o in sorted(recon.observations.items())},
    }


def save_reconstruction(recon: Reconstruction, path: PathLike) -> None:
    """Write a reconstruction file, values kept exactly."""
    write_json(path, reconstruction_to_dict(recon))


# Tensors

def _write_tensor(path: PathLike, values: np.ndarray) -> None:
    k, h, w = values.shape
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(TENSOR_HEADER.pack(TENSOR_MAGIC, k, h, w))
        f.write(np.ascontiguousarray(values, dtype='<f4').tobytes())


def _read_tensor(path: PathLike) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise SchemaError(f'cannot read file ({e.strerror})', path=str(path)) from e
    if len(raw) < TENSOR_HEADER.size:
        raise SchemaError('truncated header', path=str(path))
    magic, k, h, w = TENSOR_HEADER.unpack_from(raw)
    if magic != TENSOR_MAGIC:
        raise SchemaError(f'bad magic {magic!r}', path=str(path))
    if min(k, h, w) < 1:
        raise SchemaError(f'empty tensor {k}x{h}x{w}', path=str(path))
    expected = TENSOR_HEADER.size + 4 * k * h * w
    if len(raw) != expected:
        raise ShapeMismatchError(f'{path}: header {k}x{h}x{w} needs {expected} bytes, file has {len(raw)}')
    return np.frombuffer(raw, dtype='<f4', offset=TENSOR_HEADER.size).reshape(k, h, w)


def save_tensor(f: FeatureMap, path: PathLike) -> None:
    """Write a feature map: 16-byte header then K H' W' little-endian float32, channel-major."""
    _write_tensor(path, f.values)


def load_tensor(path: PathLike) -> FeatureMap:
    """Read a feature map written by :func:`save_tensor`, values recovered bit-exactly."""
    try:
        return FeatureMap(_read_tensor(path))
    except InvalidInputError as e:
        raise SchemaError(str(e), path=str(path)) from e


def save_weights(w: ClassWeights, path: PathLike) -> None:
    """Write class weights as a K x 1 x 1 tensor."""
    _write_tensor(path, np.asarray(w.values, dtype=np.float32).reshape(-1, 1, 1))


def load_weights(path: PathLike) -> ClassWeights:
    """Read class weights, a K x 1 x 1 tensor."""
    values = _read_tensor(path)
    if values.shape[1:] != (1, 1):
        raise ShapeMismatchError(f'{path}: class weights must be K x 1 x 1, got {values.shape}')
    try:
        return ClassWeights(values.reshape(-1).astype(np.float64))
    except InvalidInputError as e:
        raise SchemaError(str(e), path=str(path)) from e


def write_pgm(mask: np.ndarray, path: PathLike) -> None:
    """Write a boolean mask as a plain-text graymap (P2), foreground 255."""
    m = np.asarray(mask, dtype=bool)
    rows = '\n'.join(' '.join('255' if v else '0' for v in row) for row in m)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(f'P2\n{m.shape[1]} {m.shape[0]}\n255\n{rows}\n', encoding='ascii')


# GeoJSON

def _to_lonlat(ring: np.ndarray, origin: GeoPoint, height: float) -> list:
    lat, lon, _ = enu_to_geodetic_array(ring[:, 0], ring[:, 1], np.full(len(ring), height), origin)
    coords = [[float(a), float(b)] for a, b in zip(lon, lat)]
    return coords + coords[:1]


def _oriented(ring: np.ndarray, ccw: bool) -> np.ndarray:
    return ring if (ring_signed_area(ring) > 0) == ccw else ring[::-1]


def _geometry_to_geojson(geom: Geometry, origin: GeoPoint, height: float) -> dict:
    if isinstance(geom, (Polygon2D, MultiPolygon2D)):
        polys = [geom] if isinstance(geom, Polygon2D) else list(geom)
        rings = [[_to_lonlat(_oriented(p.exterior, True), origin, height)]
                 + [_to_lonlat(_oriented(h, False), origin, height) for h in p.holes] for p in polys]
        return {'type': 'MultiPolygon', 'coordinates': rings}
    x, y = geom
    lat, lon, _ = enu_to_geodetic_array([x], [y], [height], origin)
    return {'type': 'Point', 'coordinates': [float(lon[0]), float(lat[0])]}


def write_geojson(path: PathLike, features: Iterable[Tuple[Geometry, dict]], origin: GeoPoint,
                  height: float = 0.0) -> None:
    """Write ENU geometries as a GeoJSON feature collection in geographic coordinates.

    Rings are closed, exteriors counter-clockwise and holes clockwise.

    :param path: output file.
    :type path: str or pathlib.Path
    :param features: (geometry, properties) pairs; a geometry is a polygon,
        a multipolygon or an (x, y) point in ENU meters.
    :type features: Iterable[tuple]
    :param origin: anchor of the ENU frame.
    :type origin: GeoPoint
    :param height: ENU height of the geometries (ground plane).
    :type height: float
    """
    collection = {'type': 'FeatureCollection', 'features': [
        {'type': 'Feature', 'geometry': _geometry_to_geojson(geom, origin, height), 'properties': props}
        for geom, props in features]}
    write_json(path, collection)


def _ring_to_enu(coords, origin: GeoPoint, height: float, where: str) -> np.ndarray:
    arr = np.asarray(coords, dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 2 or len(arr) < 4:
        raise SchemaError('linear ring of at least 4 positions expected', field=where)
    e, n, _ = geodetic_to_enu_array(arr[:, 1], arr[:, 0], np.full(len(arr), origin.alt + height), origin)
    return np.column_stack([e, n])


def _geojson_polygons(geometry, origin, height, where) -> List[Polygon2D]:
    kind = _get(geometry, 'type', where)
    coords = _get(geometry, 'coordinates', where) if kind != 'GeometryCollection' else None
    if kind == 'Polygon':
        parts = [coords]
    elif kind == 'MultiPolygon':
        parts = coords
    elif kind == 'GeometryCollection':
        return [p for i, g in enumerate(_get(geometry, 'geometries', where))
                for p in _geojson_polygons(g, origin, height, f'{where}.geometries[{i}]')]
    else:
        return []
    polys = []
    for i, rings in enumerate(parts):
        if not rings:
            raise SchemaError('empty polygon', field=f'{where}.coordinates[{i}]')
        enu = [_ring_to_enu(r, origin, height, f'{where}.coordinates[{i}]') for r in rings]
        try:
            polys.append(Polygon2D.from_points(enu[0], enu[1:]))
        except LenseDelError as e:
            raise SchemaError(str(e), field=f'{where}.coordinates[{i}]') from e
    return polys


def read_geojson(path: PathLike, origin: GeoPoint, height: float = 0.0) -> MultiPolygon2D:
    """Read the polygons of a GeoJSON file into the ENU frame of `origin`.

    Feature collections, single features and bare geometries are accepted;
    non-areal geometries are skipped. Invalid rings are repaired by the
    overlay (self-intersections), overlapping parts are merged.

    :param path: GeoJSON file.
    :type path: str or pathlib.Path
    :param origin: anchor of the ENU frame.
    :type origin: GeoPoint
    :param height: ENU height of the region (ground plane).
    :type height: float
    :return: region in ENU meters.
    :rtype: MultiPolygon2D
    """
    data = read_json(path)
    try:
        kind = _get(data, 'type', '')
        if kind == 'FeatureCollection':
            geometries = [(_get(f, 'geometry', f'features[{i}]'), f'features[{i}].geometry')
                          for i, f in enumerate(_get(data, 'features', ''))]
        elif kind == 'Feature':
            geometries = [(_get(data, 'geometry', ''), 'geometry')]
        else:
            geometries = [(data, '')]
        polys = [p for g, where in geometries if g is not None
                 for p in _geojson_polygons(g, origin, height, where)]
    except SchemaError as e:
        raise SchemaError(e.message, path=str(path), field=e.field, line=e.line) from e
    return from_shapely(to_shapely(MultiPolygon2D(tuple(polys))))


def read_geojson_points(path: PathLike, origin: GeoPoint, height: float = 0.0) -> Dict[str, Tuple[float, float]]:
    """Read the Point features of a collection, keyed by their ``image_id`` property (or index)."""
    data = read_json(path)
    points = {}
    try:
        for i, f in enumerate(_get(data, 'features', '')):
            geometry = _get(f, 'geometry', f'features[{i}]')
            if not geometry or geometry.get('type') != 'Point':
                continue
            lon, lat = _floats(_get(geometry, 'coordinates', f'features[{i}].geometry'), None,
                               f'features[{i}].geometry.coordinates')[:2]
            e, n, _ = geodetic_to_enu_array([lat], [lon], [origin.alt + height], origin)
            key = str((f.get('properties') or {}).get('image_id', i))
            points[key] = (float(e[0]), float(n[0]))
    except SchemaError as e:
        raise SchemaError(e.message, path=str(path), field=e.field, line=e.line) from e
    return points


def read_geojson_features(path: PathLike, origin: GeoPoint,
                          height: float = 0.0) -> List[Tuple[MultiPolygon2D, dict]]:
    """Read every areal feature of a collection with its properties."""
    data = read_json(path)
    features = []
    try:
        for i, f in enumerate(_get(data, 'features', '')):
            geometry = _get(f, 'geometry', f'features[{i}]')
            if geometry is None:
                continue
            polys = _geojson_polygons(geometry, origin, height, f'features[{i}].geometry')
            if polys:
                features.append((MultiPolygon2D(tuple(polys)), dict(f.get('properties') or {})))
    except SchemaError as e:
        raise SchemaError(e.message, path=str(path), field=e.field, line=e.line) from e
    return features


# Tables

@dataclass(frozen=True)
class ImageMeta:
    """Metadata row of an image: GPS tag and, when known, its flood classification."""
    image_id: str
    gps: GeoPoint
    flood: Optional[bool] = None


_TRUE = {'1', 'true', 'yes', 'y', 't'}
_FALSE = {'0', 'false', 'no', 'n', 'f'}


def _read_csv(path: PathLike, required: Tuple[str, ...]) -> pd.DataFrame:
    try:
        table = pd.read_csv(path, dtype={'image_id': str}, skipinitialspace=True, float_precision='round_trip')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f'cannot read table ({e})', path=str(path)) from e
    table.columns = [str(c).strip() for c in table.columns]
    for column in required:
        if column not in table.columns:
            raise SchemaError('missing column', path=str(path), field=column)
    ids = table['image_id']
    if ids.isna().any():
        row = int(np.flatnonzero(ids.isna().to_numpy())[0])
        raise SchemaError('empty image id', path=str(path), field='image_id', line=row + 2)
    duplicated = ids.duplicated().to_numpy()
    if duplicated.any():
        row = int(np.flatnonzero(duplicated)[0])
        raise SchemaError(f'duplicate image id {ids.iloc[row]!r}', path=str(path), field='image_id', line=row + 2)
    return table


def _numeric(table: pd.DataFrame, column: str, path: PathLike) -> np.ndarray:
    values = pd.to_numeric(table[column], errors='coerce').to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise SchemaError(f'invalid number {table[column].iloc[row]!r}', path=str(path), field=column,
                          line=row + 2)
    return values


def _flag(value, path, row) -> Optional[bool]:
    if pd.isna(value):
        return None
    text = str(value).strip().lower()
    if text in _TRUE or text in ('1.0',):
        return True
    if text in _FALSE or text in ('0.0',):
        return False
    raise SchemaError(f'invalid flag {value!r}', path=str(path), field='flood', line=row + 2)


def load_metadata(path: PathLike) -> Dict[str, ImageMeta]:
    """Load the image metadata table.

    Columns: ``image_id``, ``lat``, ``lon``, optional ``alt`` (meters, default
    0) and optional ``flood`` (1/0, true/false; empty for unknown).

    :param path: CSV file.
    :type path: str or pathlib.Path
    :return: metadata by image id.
    :rtype: dict[str, ImageMeta]
    :raises SchemaError: missing column, invalid value or duplicate image id, with its line.
    """
    table = _read_csv(path, ('image_id', 'lat', 'lon'))
    lat = _numeric(table, 'lat', path)
    lon = _numeric(table, 'lon', path)
    alt = _numeric(table, 'alt', path) if 'alt' in table.columns else np.zeros(len(table))
    has_flood = 'flood' in table.columns
    meta = {}
    for row, image_id in enumerate(table['image_id']):
        try:
            gps = GeoPoint(float(lat[row]), float(lon[row]), float(alt[row]))
        except InvalidInputError as e:
            raise SchemaError(str(e), path=str(path), field='lat/lon', line=row + 2) from e
        flood = _flag(table['flood'].iloc[row], path, row) if has_flood else None
        meta[str(image_id)] = ImageMeta(str(image_id), gps, flood)
    logger.info('%s: metadata of %d images', path, len(meta))
    return meta


def load_votes(path: PathLike) -> List[VoteRecord]:
    """Load the worker votes table: columns ``image_id``, ``B`` (positive votes), ``w`` (workers)."""
    table = _read_csv(path, ('image_id', 'B', 'w'))
    positive = _numeric(table, 'B', path)
    workers = _numeric(table, 'w', path)
    records = []
    for row, image_id in enumerate(table['image_id']):
        b, w = positive[row], workers[row]
        if b != int(b) or w != int(w):
            raise SchemaError('vote counts must be integers', path=str(path), field='B/w', line=row + 2)
        try:
            records.append(VoteRecord(str(image_id), int(b), int(w)))
        except InvalidInputError as e:
            raise SchemaError(str(e), path=str(path), field='B/w', line=row + 2) from e
    return records


def write_labels(labels: Dict[str, bool], path: PathLike) -> None:
    """Write the image labels as a CSV table (image_id, label), sorted by image id."""
    table = pd.DataFrame({'image_id': sorted(labels), 'label': [int(labels[k]) for k in sorted(labels)]})
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, lineterminator='\n')


def write_metadata(meta: Iterable[ImageMeta], path: PathLike) -> None:
    """Write an image metadata table (image_id, lat, lon, alt, flood)."""
    rows = sorted(meta, key=lambda m: m.image_id)
    table = pd.DataFrame({
        'image_id': [m.image_id for m in rows],
        'lat': [repr(m.gps.lat) for m in rows],
        'lon': [repr(m.gps.lon) for m in rows],
        'alt': [repr(m.gps.alt) for m in rows],
        'flood': ['' if m.flood is None else int(m.flood) for m in rows],
    })
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, lineterminator='\n')


# Stage intermediates

def georef_to_dict(results: Dict[str, GeorefResult], retained: Dict[str, bool]) -> dict:
    return {k: {'homography': r.homography.matrix.tolist(), 'inlier_ratio': r.inlier_ratio,
                'inlier_count': r.inlier_count, 'rms_error': r.rms_error, 'retained': bool(retained[k])}
            for k, r in sorted(results.items())}


def save_georef(results: Dict[str, GeorefResult], retained: Dict[str, bool], path: PathLike) -> None:
    """Write the per-image homographies and their gate decision."""
    write_json(path, georef_to_dict(results, retained))


def load_georef(path: PathLike) -> Dict[str, Tuple[GeorefResult, bool]]:
    """Read a file written by :func:`save_georef`."""
    data = read_json(path)
    results = {}
    try:
        for image_id, r in data.items():
            where = str(image_id)
            h = _floats(_get(r, 'homography', where), None, f'{where}.homography')
            if h.shape != (3, 3):
                raise SchemaError('3x3 matrix expected', field=f'{where}.homography')
            try:
                homography = Homography(h)
            except LenseDelError as e:
                raise SchemaError(str(e), field=f'{where}.homography') from e
            result = GeorefResult(where, homography, float(_get(r, 'inlier_ratio', where)),
                                  int(_get(r, 'inlier_count', where)), float(_get(r, 'rms_error', where)))
            results[where] = (result, bool(r.get('retained', True)))
    except SchemaError as e:
        raise SchemaError(e.message, path=str(path), field=e.field, line=e.line) from e
    return results


def save_image_polygons(polygons: Dict[str, List[ImagePolygon]], path: PathLike) -> None:
    """Write the damage polygons of each image, in pixels."""
    write_json(path, {k: [{'exterior': p.polygon.exterior.tolist(), 'pixel_area': p.pixel_area} for p in v]
                      for k, v in sorted(polygons.items())})


def load_image_polygons(path: PathLike) -> Dict[str, List[ImagePolygon]]:
    """Read a file written by :func:`save_image_polygons`."""
    data = read_json(path)
    polygons = {}
    try:
        for image_id, items in data.items():
            out = []
            for i, item in enumerate(items):
                where = f'{image_id}[{i}]'
                try:
                    poly = Polygon2D(_floats(_get(item, 'exterior', where), None, f'{where}.exterior'))
                except LenseDelError as e:
                    if isinstance(e, SchemaError):
                        raise
                    raise SchemaError(str(e), field=f'{where}.exterior') from e
                out.append(ImagePolygon(poly, int(_get(item, 'pixel_area', where))))
            polygons[str(image_id)] = out
    except SchemaError as e:
        raise SchemaError(e.message, path=str(path), field=e.field, line=e.line) from e
    return polygons
