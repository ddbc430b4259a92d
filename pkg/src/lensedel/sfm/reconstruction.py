# -*- coding: utf-8 -*-
"""reconstruction file.

File containing the structure-from-motion data model: pinhole
:class:`CameraModel`, posed :class:`Shot` and the sparse
:class:`Reconstruction` with its image <-> world observations.

Pixel coordinates follow the usual convention: the center of the pixel at
column `c` and row `r` is the point (c, r). Lens distortion is assumed to
be already removed from the observations.

.. module:: reconstruction
   :synopsis: sparse reconstruction data model.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from lensedel.errors import InvalidInputError, SchemaError
from lensedel.geocore.geodetic import GeoPoint

QUATERNION_TOL = 1e-9


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera without distortion.

    :param width: image width in pixels.
    :type width: int
    :param height: image height in pixels.
    :type height: int
    :param focal: focal length in pixels.
    :type focal: float
    :param cx: principal point, X-axis, in pixels.
    :type cx: float
    :param cy: principal point, Y-axis, in pixels.
    :type cy: float
    """
    width: int
    height: int
    focal: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidInputError(f'image size {self.width}x{self.height} must be positive')
        if not (np.isfinite(self.focal) and self.focal > 0):
            raise InvalidInputError(f'focal length {self.focal} must be positive')
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise InvalidInputError(f'principal point ({self.cx}, {self.cy}) outside the image')

    @property
    def matrix(self) -> np.ndarray:
        """Intrinsic matrix K."""
        return np.array([[self.focal, 0.0, self.cx],
                         [0.0, self.focal, self.cy],
                         [0.0, 0.0, 1.0]])

    def corners(self) -> np.ndarray:
        """Image corners (0, 0), (W, 0), (W, H), (0, H)."""
        w, h = float(self.width), float(self.height)
        return np.array([[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]])


@dataclass(frozen=True, eq=False)
class Shot:
    """Posed image.

    :param image_id: identifier of the image.
    :type image_id: str
    :param rotation: world to camera rotation, unit quaternion (w, x, y, z).
    :type rotation: tuple[float, float, float, float]
    :param translation: world to camera translation in meters.
    :type translation: numpy.ndarray
    :param camera_id: key of the camera model.
    :type camera_id: str
    :param gps: GPS tag of the image, if any.
    :type gps: GeoPoint
    """
    image_id: str
    rotation: Tuple[float, float, float, float]
    translation: np.ndarray
    camera_id: str
    gps: Optional[GeoPoint] = None

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=float)
        if q.shape != (4,) or not np.all(np.isfinite(q)):
            raise InvalidInputError(f'shot {self.image_id}: quaternion must hold 4 finite values')
        if abs(np.linalg.norm(q) - 1.0) > QUATERNION_TOL:
            raise InvalidInputError(f'shot {self.image_id}: quaternion norm {np.linalg.norm(q)} is not 1')
        t = np.array(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(t)):
            raise InvalidInputError(f'shot {self.image_id}: non-finite translation')
        t.flags.writeable = False
        object.__setattr__(self, 'rotation', tuple(float(v) for v in q))
        object.__setattr__(self, 'translation', t)

    @classmethod
    def from_matrix(cls, image_id: str, rotation: np.ndarray, translation,
                    camera_id: str, gps: Optional[GeoPoint] = None) -> 'Shot':
        """Build a shot from a 3x3 world to camera rotation matrix."""
        x, y, z, w = Rotation.from_matrix(np.asarray(rotation, dtype=float)).as_quat()
        q = np.array([w, x, y, z])
        if q[0] < 0:
            q = -q
        q /= np.linalg.norm(q)
        return cls(image_id, tuple(q), np.asarray(translation, dtype=float), camera_id, gps)

    @property
    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return Rotation.from_quat([x, y, z, w]).as_matrix()

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates, -R^T t."""
        return -self.rotation_matrix.T @ self.translation


@dataclass(frozen=True, eq=False)
class Observations:
    """Pixel observations of one shot: pixel (u, v) of the 3D point `point_ids[i]`."""
    pixels: np.ndarray
    point_ids: np.ndarray

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=float).reshape(-1, 2)
        ids = np.array(self.point_ids, dtype=np.int64).reshape(-1)
        if len(pixels) != len(ids):
            raise InvalidInputError('observations: pixel and point index counts differ')
        pixels.flags.writeable = False
        ids.flags.writeable = False
        object.__setattr__(self, 'pixels', pixels)
        object.__setattr__(self, 'point_ids', ids)

    def __len__(self) -> int:
        return len(self.point_ids)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Sparse reconstruction in the ENU frame of `origin`.

    :param origin: geodetic anchor of the ENU frame.
    :type origin: GeoPoint
    :param cameras: camera models by id.
    :type cameras: dict[str, CameraModel]
    :param shots: posed images by image id.
    :type shots: dict[str, Shot]
    :param points: (n, 3) array of 3D points in ENU meters.
    :type points: numpy.ndarray
    :param observations: per-shot observations.
    :type observations: dict[str, Observations]
    """
    origin: GeoPoint
    cameras: Dict[str, CameraModel]
    shots: Dict[str, Shot]
    points: np.ndarray
    observations: Dict[str, Observations] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        if len(pts) < 3:
            raise SchemaError(f'a reconstruction needs at least 3 points, got {len(pts)}', field='points')
        if not np.all(np.isfinite(pts)):
            raise SchemaError('non-finite 3D point', field='points')
        pts.flags.writeable = False
        object.__setattr__(self, 'points', pts)
        for shot_id, shot in self.shots.items():
            if shot.camera_id not in self.cameras:
                raise SchemaError(f'unknown camera {shot.camera_id!r}', field=f'shots.{shot_id}.camera')
        for shot_id, obs in self.observations.items():
            if shot_id not in self.shots:
                raise SchemaError(f'observations of unknown shot {shot_id!r}', field=f'observations.{shot_id}')
            if len(obs) and (obs.point_ids.min() < 0 or obs.point_ids.max() >= len(pts)):
                raise SchemaError('dangling point index', field=f'observations.{shot_id}')

    def camera_of(self, shot_id: str) -> CameraModel:
        return self.cameras[self.shots[shot_id].camera_id]

    def camera_centers(self) -> np.ndarray:
        """(n, 3) array of the camera centers, in shot id order."""
        return np.array([self.shots[k].center for k in sorted(self.shots)]).reshape(-1, 3)

    def observations_of(self, shot_id: str) -> Observations:
        return self.observations.get(shot_id, Observations(np.empty((0, 2)), np.empty(0, dtype=np.int64)))

    def project(self, shot_id: str, points: np.ndarray) -> np.ndarray:
        """Project world points into the pixels of a shot."""
        shot = self.shots[shot_id]
        cam = self.camera_of(shot_id)
        p_cam = np.asarray(points, dtype=float).reshape(-1, 3) @ shot.rotation_matrix.T + shot.translation
        return cam.focal * p_cam[:, :2] / p_cam[:, 2:3] + np.array([cam.cx, cam.cy])
