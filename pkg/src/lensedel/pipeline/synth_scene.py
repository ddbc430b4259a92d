# -*- coding: utf-8 -*-
"""synth_scene file.

File containing the generator of synthetic flights, used as an oracle by
the end-to-end tests and by the ``lensedel synth`` command.

The scene is a flat ground at a known height, flown over by pinhole cameras
on a nearly straight track, all looking sideways with the same pitch. Ground
features are projected into every image that sees them, some matches are
replaced by random pixels, and the reconstruction is stored tilted about a
horizontal axis, as an SfM reconstruction of a collinear track would be.
The feature maps are built so that their activation map is the signed
distance (in pixels, positive inside) to the image of a known flood polygon.

.. module:: synth_scene
   :synopsis: synthetic scenes with known ground truth.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import shapely
from scipy.spatial.transform import Rotation
from shapely.geometry import Polygon, box

from lensedel.cam.cam_extent import ClassWeights, FeatureMap
from lensedel.errors import GeometryError, InvalidInputError
from lensedel.geocore.geodetic import GeoPoint, enu_to_geodetic_array
from lensedel.geocore.polygons import Polygon2D
from lensedel.pipeline import pipeline_io
from lensedel.sfm.recon_align import apply_alignment
from lensedel.sfm.reconstruction import CameraModel, Observations, Reconstruction, Shot

logger = logging.getLogger(__name__)

FLOOD_POLYGON = ((-250.0, 355.0), (-150.0, 230.0), (150.0, 230.0),
                 (250.0, 355.0), (150.0, 480.0), (-150.0, 480.0))
_MAX_RANGE = 4000.0


@dataclass(frozen=True)
class SceneParams:
    """
    Parameters of a synthetic scene.

    :param n_cameras: cameras of the track.
    :param n_points: ground features.
    :param outlier_fraction: fraction of the matches replaced by random pixels.
    :param point_outlier_fraction: fraction of the features lifted above the ground.
    :param pixel_noise: standard deviation of the pixel noise of the matches.
    :param horizon_camera: add a camera looking close to the horizon.
    """
    n_cameras: int = 12
    n_points: int = 500
    outlier_fraction: float = 0.2
    point_outlier_fraction: float = 0.0
    pixel_noise: float = 0.0
    spacing: float = 60.0
    altitude: float = 300.0
    altitude_jitter: float = 5.0
    track_jitter: float = 2.0
    yaw_jitter_deg: float = 1.0
    pitch_deg: float = 45.0
    width: int = 640
    height: int = 480
    focal: float = 800.0
    ground_height: float = 5.0
    tilt_deg: float = 5.0
    tilt_azimuth_deg: float = 0.0
    feature_shape: Tuple[int, int] = (15, 20)
    channels: int = 4
    horizon_camera: bool = False
    horizon_pitch_deg: float = 10.0
    boundary_half_size: float = 3000.0
    origin: GeoPoint = GeoPoint(30.45, -91.15, 0.0)
    flood_polygon: Tuple[Tuple[float, float], ...] = FLOOD_POLYGON

    def __post_init__(self):
        if self.n_cameras < 1 or self.n_points < 3:
            raise InvalidInputError('a scene needs at least one camera and 3 points')
        for name in ('outlier_fraction', 'point_outlier_fraction'):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise InvalidInputError(f'{name} must be in [0, 1)')
        if min(self.feature_shape) < 2 or self.channels < 1:
            raise InvalidInputError('feature maps need at least 2x2 cells and one channel')


@dataclass(frozen=True, eq=False)
class SynthScene:
    """Generated inputs and the ground truth they were made from.

    :param reconstruction: stored reconstruction (tilted).
    :param true_reconstruction: reconstruction in the level frame.
    :param homographies: true image to ground homography of each image.
    :param flood: true flood polygon, ENU meters.
    :param boundary: administrative boundary, ENU meters.
    :param features: feature map of each image.
    :param weights: class weights.
    :param metadata: GPS tag and flood flag of each image.
    :param outliers: for each image, True for the matches that are not ground inliers.
    :param horizon_ids: images looking close to the horizon.
    """
    params: SceneParams
    reconstruction: Reconstruction
    true_reconstruction: Reconstruction
    homographies: Dict[str, np.ndarray]
    flood: Polygon2D
    boundary: Polygon2D
    features: Dict[str, FeatureMap]
    weights: ClassWeights
    metadata: List[pipeline_io.ImageMeta]
    outliers: Dict[str, np.ndarray]
    tilt: np.ndarray
    pivot: np.ndarray
    horizon_ids: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def origin(self) -> GeoPoint:
        return self.params.origin

    @property
    def ground_height(self) -> float:
        return self.params.ground_height


def look_rotation(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    """World to camera rotation of a camera heading `yaw` (from north, clockwise) and looking `pitch` below the horizon.

    Camera axes: x to the right of the image, y down, z forward.
    """
    yaw, pitch = np.radians(yaw_deg), np.radians(pitch_deg)
    forward = np.array([np.sin(yaw) * np.cos(pitch), np.cos(yaw) * np.cos(pitch), -np.sin(pitch)])
    right = np.cross(forward, [0.0, 0.0, 1.0])
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    return np.vstack([right, down, forward])


def ground_homography(shot: Shot, cam: CameraModel, height: float) -> np.ndarray:
    """Exact homography from the pixels of a shot to the plane z = height."""
    r = shot.rotation_matrix
    g = cam.matrix @ np.column_stack([r[:, 0], r[:, 1], height * r[:, 2] + shot.translation])
    h = np.linalg.inv(g)
    return h / np.linalg.norm(h)


def _back_project(shot: Shot, cam: CameraModel, pixels: np.ndarray, height: float):
    rays = np.column_stack([(pixels[:, 0] - cam.cx) / cam.focal, (pixels[:, 1] - cam.cy) / cam.focal,
                            np.ones(len(pixels))]) @ shot.rotation_matrix
    center = shot.center
    with np.errstate(divide='ignore', invalid='ignore'):
        s = (height - center[2]) / rays[:, 2]
    ok = (rays[:, 2] < 0) & (s > 0)
    points = center + np.where(ok, s, 0.0)[:, None] * rays
    ok &= np.hypot(points[:, 0] - center[0], points[:, 1] - center[1]) <= _MAX_RANGE
    return points, ok


def _project(shot: Shot, cam: CameraModel, points: np.ndarray):
    p_cam = points @ shot.rotation_matrix.T + shot.translation
    depth = p_cam[:, 2]
    with np.errstate(divide='ignore', invalid='ignore'):
        pixels = cam.focal * p_cam[:, :2] / depth[:, None] + np.array([cam.cx, cam.cy])
    inside = (depth > 0) & (pixels[:, 0] >= 0) & (pixels[:, 0] <= cam.width) \
        & (pixels[:, 1] >= 0) & (pixels[:, 1] <= cam.height)
    return pixels, inside


def _cameras(params: SceneParams, rng: np.random.Generator):
    poses = []
    for i in range(params.n_cameras):
        x = (i - (params.n_cameras - 1) / 2.0) * params.spacing
        y = rng.uniform(-params.track_jitter, params.track_jitter)
        z = params.altitude + rng.uniform(-params.altitude_jitter, params.altitude_jitter)
        yaw = rng.uniform(-params.yaw_jitter_deg, params.yaw_jitter_deg)
        poses.append((f'img_{i:03d}', np.array([x, y, z]), yaw, params.pitch_deg))
    if params.horizon_camera:
        poses.append(('img_horizon', np.array([0.0, -100.0, params.altitude]), 0.0, params.horizon_pitch_deg))
    return poses


def _signed_distance_grid(polygon_px: Polygon, cam: CameraModel, shape: Tuple[int, int]) -> np.ndarray:
    rows, cols = shape
    v = np.linspace(0.0, cam.height - 1, rows)
    u = np.linspace(0.0, cam.width - 1, cols)
    uu, vv = np.meshgrid(u, v)
    dist = shapely.distance(polygon_px.exterior, shapely.points(uu.ravel(), vv.ravel()))
    inside = shapely.contains_xy(polygon_px, uu.ravel(), vv.ravel())
    return np.where(inside, dist, -dist).reshape(rows, cols)


def generate_scene(params: Optional[SceneParams] = None, seed: int = 0) -> SynthScene:
    """Generate a synthetic flight with its ground truth.

    :param params: scene parameters, default :class:`SceneParams`.
    :type params: SceneParams
    :param seed: seed of the random generator, equal seeds give equal scenes.
    :type seed: int
    :return: generated scene.
    :rtype: SynthScene
    """
    params = params or SceneParams()
    rng = np.random.default_rng(seed)
    cam = CameraModel(params.width, params.height, params.focal, params.width / 2.0, params.height / 2.0)
    h_ground = params.ground_height

    shots = {}
    for image_id, center, yaw, pitch in _cameras(params, rng):
        r = look_rotation(yaw, pitch)
        shots[image_id] = (r, center)
    ids = sorted(shots)

    per_camera = np.full(len(ids), params.n_points // len(ids))
    per_camera[:params.n_points % len(ids)] += 1
    chunks = []
    for image_id, count in zip(ids, per_camera):
        r, center = shots[image_id]
        shot = Shot.from_matrix(image_id, r, -r @ center, 'cam0')
        found = np.empty((0, 3))
        while len(found) < count:
            pixels = rng.uniform([0.0, 0.0], [cam.width, cam.height], size=(2 * count, 2))
            pts, ok = _back_project(shot, cam, pixels, h_ground)
            found = np.vstack([found, pts[ok]])
        chunks.append(found[:count])
    points = np.vstack(chunks)
    lifted = rng.random(len(points)) < params.point_outlier_fraction
    points[lifted, 2] += rng.uniform(20.0, 60.0, size=int(lifted.sum()))

    gps_lat, gps_lon, gps_alt = enu_to_geodetic_array(
        [shots[k][1][0] for k in ids], [shots[k][1][1] for k in ids], [shots[k][1][2] for k in ids],
        params.origin)
    true_shots, observations, outliers, homographies = {}, {}, {}, {}
    for n, image_id in enumerate(ids):
        r, center = shots[image_id]
        gps = GeoPoint(float(gps_lat[n]), float(gps_lon[n]), float(gps_alt[n]))
        shot = Shot.from_matrix(image_id, r, -r @ center, 'cam0', gps)
        true_shots[image_id] = shot
        pixels, inside = _project(shot, cam, points)
        idx = np.flatnonzero(inside)
        obs = pixels[idx]
        if params.pixel_noise > 0:
            obs = obs + rng.normal(0.0, params.pixel_noise, size=obs.shape)
        replaced = rng.random(len(idx)) < params.outlier_fraction
        obs[replaced] = rng.uniform([0.0, 0.0], [cam.width, cam.height], size=(int(replaced.sum()), 2))
        observations[image_id] = Observations(obs, idx)
        outliers[image_id] = replaced | lifted[idx]
        homographies[image_id] = ground_homography(shot, cam, h_ground)
    true_recon = Reconstruction(params.origin, {'cam0': cam}, true_shots, points, observations)

    pivot = points[~lifted].mean(axis=0)
    azimuth = np.radians(params.tilt_azimuth_deg)
    tilt = Rotation.from_rotvec(np.radians(params.tilt_deg)
                                * np.array([np.cos(azimuth), np.sin(azimuth), 0.0])).as_matrix()
    stored = apply_alignment(true_recon, tilt, pivot)

    flood = Polygon2D(np.array(params.flood_polygon, dtype=float))
    flood_3d = np.column_stack([flood.exterior, np.full(len(flood), h_ground)])
    weights = np.concatenate([[1.0], rng.uniform(-1.0, 1.0, params.channels - 1)])
    image_box = box(0.0, 0.0, cam.width, cam.height)
    features, metadata = {}, []
    for n, image_id in enumerate(ids):
        shot = true_shots[image_id]
        p_cam = flood_3d @ shot.rotation_matrix.T + shot.translation
        if np.any(p_cam[:, 2] <= 0):
            raise GeometryError(f'{image_id}: the flood polygon is behind the camera')
        flood_px = Polygon(cam.focal * p_cam[:, :2] / p_cam[:, 2:3] + np.array([cam.cx, cam.cy]))
        target = _signed_distance_grid(flood_px, cam, params.feature_shape)
        others = rng.uniform(0.0, 50.0, size=(params.channels - 1,) + tuple(params.feature_shape))
        first = (target - np.tensordot(weights[1:], others, axes=1)) / weights[0]
        features[image_id] = FeatureMap(np.concatenate([first[None], others]).astype(np.float32))
        metadata.append(pipeline_io.ImageMeta(image_id, shot.gps, bool(flood_px.intersects(image_box))))

    half = params.boundary_half_size
    boundary = Polygon2D(np.array([[-half, -half], [half, -half], [half, half], [-half, half]]))
    horizon_ids = ('img_horizon',) if params.horizon_camera else ()
    logger.info('synthetic scene: %d images, %d points, seed %d', len(ids), len(points), seed)
    return SynthScene(params, stored, true_recon, homographies, flood, boundary, features,
                      ClassWeights(weights), metadata, outliers, tilt, pivot, horizon_ids)


def write_scene(scene: SynthScene, out_dir) -> Path:
    """Write the inputs of a scene, its truth and a ready-to-run configuration.

    :param scene: generated scene.
    :type scene: SynthScene
    :param out_dir: output directory.
    :type out_dir: str or pathlib.Path
    :return: path of the written ``config.json``.
    :rtype: pathlib.Path
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pipeline_io.save_reconstruction(scene.reconstruction, out / 'reconstruction.json')
    for image_id, f in scene.features.items():
        pipeline_io.save_tensor(f, out / 'features' / f'{image_id}.delt')
    pipeline_io.save_weights(scene.weights, out / 'weights.delt')
    pipeline_io.write_metadata(scene.metadata, out / 'metadata.csv')
    pipeline_io.write_geojson(out / 'truth.geojson', [(scene.flood, {'name': 'flood'})],
                              scene.origin, scene.ground_height)
    pipeline_io.write_geojson(out / 'boundary.geojson', [(scene.boundary, {'name': 'boundary'})],
                              scene.origin, scene.ground_height)
    pipeline_io.write_json(out / 'scene_truth.json', {
        'ground_height': scene.ground_height,
        'flood': scene.flood.exterior.tolist(),
        'homographies': {k: v.tolist() for k, v in sorted(scene.homographies.items())},
        'tilt': scene.tilt.tolist(),
        'pivot': scene.pivot.tolist(),
        'horizon_ids': list(scene.horizon_ids),
    })
    config = {
        'paths': {'reconstruction': 'reconstruction.json', 'features': 'features', 'weights': 'weights.delt',
                  'truth': 'truth.geojson', 'boundary': 'boundary.geojson', 'metadata': 'metadata.csv',
                  'out': 'out'},
        'seed': 0,
    }
    pipeline_io.write_json(out / 'config.json', config)
    logger.info('scene written to %s', out)
    return out / 'config.json'
