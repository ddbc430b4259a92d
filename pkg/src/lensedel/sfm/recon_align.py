# -*- coding: utf-8 -*-
"""recon_align file.

File containing the gravity alignment of a reconstruction.

Reconstructions of fixed-wing flights have nearly collinear camera tracks,
so the reconstruction is free to roll about the track. The ground is
assumed flat: a plane is fitted through the reconstructed points with
RANSAC, the normal pointing towards the cameras is taken as the up-vector,
and the whole reconstruction is rotated so that the up-vector becomes +z.

.. module:: recon_align
   :synopsis: ground plane fitting and up-vector alignment of a reconstruction.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from lensedel.errors import GeometryError, InvalidInputError, UpVectorAmbiguityError
from lensedel.sfm.reconstruction import Reconstruction, Shot

logger = logging.getLogger(__name__)

DEFAULT_INLIER_DIST = 2.0
DEFAULT_MAX_ITERS = 1000
_MAX_REFITS = 10
_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class Plane:
    """Plane n.x = d with a unit normal.

    :param normal: unit normal.
    :type normal: numpy.ndarray
    :param offset: signed distance d of the plane to the origin, in meters.
    :type offset: float
    :param centroid: centroid of the points supporting the plane, if known.
    :type centroid: numpy.ndarray, optional
    """
    normal: np.ndarray
    offset: float
    centroid: Optional[np.ndarray] = None

    def __post_init__(self):
        n = np.array(self.normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise InvalidInputError(f'plane normal {n} is not a unit vector')
        object.__setattr__(self, 'normal', n)
        object.__setattr__(self, 'offset', float(self.offset))
        if self.centroid is not None:
            object.__setattr__(self, 'centroid', np.array(self.centroid, dtype=float).reshape(3))

    def distances(self, points: np.ndarray) -> np.ndarray:
        """Absolute distances of points to the plane."""
        return np.abs(np.asarray(points, dtype=float).reshape(-1, 3) @ self.normal - self.offset)

    def flipped(self) -> 'Plane':
        """Same plane with the opposite normal."""
        return Plane(-self.normal, -self.offset, self.centroid)

    @property
    def anchor(self) -> np.ndarray:
        """Reference point of the plane: the centroid, or the foot of the origin."""
        return self.centroid if self.centroid is not None else self.offset * self.normal


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    """Output of :func:`align_reconstruction`."""
    reconstruction: Reconstruction
    plane: Plane
    inliers: np.ndarray
    up_vector: np.ndarray
    rotation: np.ndarray
    pivot: np.ndarray

    @property
    def ground_height(self) -> float:
        """Height of the ground plane in the aligned frame."""
        return float(self.pivot[2])


def _canonical(normal: np.ndarray) -> np.ndarray:
    for k in (2, 1, 0):
        if abs(normal[k]) > 1e-12:
            return normal if normal[k] > 0 else -normal
    return normal


def _refit(points: np.ndarray) -> Plane:
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid)
    normal = _canonical(vt[-1] / np.linalg.norm(vt[-1]))
    return Plane(normal, float(normal @ centroid), centroid)


def fit_plane_ransac(points, inlier_dist: float = DEFAULT_INLIER_DIST,
                     max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0) -> Tuple[Plane, np.ndarray]:
    """Fit a plane through 3D points with RANSAC and a least-squares refit.

    Minimal samples of 3 points are drawn from a generator seeded with
    `seed`. The plane with most inliers (distance <= `inlier_dist`) is refit
    on its inliers by SVD of the centered points, and the refit is repeated
    until the inlier set is stable.

    :param points: (n, 3) array of points.
    :type points: array_like
    :param inlier_dist: inlier threshold in meters.
    :type inlier_dist: float
    :param max_iters: number of minimal samples.
    :type max_iters: int
    :param seed: seed of the random generator.
    :type seed: int
    :return: fitted plane and sorted indices of its inliers.
    :rtype: tuple[Plane, numpy.ndarray]
    :raises GeometryError: fewer than 3 points, or all points collinear.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(pts)
    if n < 3:
        raise GeometryError(f'plane fitting needs at least 3 points, got {n}')
    sv = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-12 * sv[0]:
        raise GeometryError('all points are collinear, the plane is undefined')
    scale2 = float(sv[0]) ** 2 / n

    rng = np.random.default_rng(seed)
    best_count = -1
    best_mask = None
    for _ in range(int(max_iters)):
        a, b, c = pts[rng.choice(n, 3, replace=False)]
        normal = np.cross(b - a, c - a)
        norm = np.linalg.norm(normal)
        if norm <= 1e-12 * scale2:
            continue
        normal /= norm
        mask = np.abs(pts @ normal - normal @ a) <= inlier_dist
        count = int(np.count_nonzero(mask))
        if count > best_count:
            best_count, best_mask = count, mask
    if best_mask is None or best_count < 3:
        logger.debug('no valid minimal sample, refitting on all points')
        best_mask = np.ones(n, dtype=bool)

    mask = best_mask
    plane = _refit(pts[mask])
    for _ in range(_MAX_REFITS):
        new_mask = plane.distances(pts) <= inlier_dist
        if np.count_nonzero(new_mask) < 3 or np.array_equal(new_mask, mask):
            break
        mask = new_mask
        plane = _refit(pts[mask])
    inliers = np.flatnonzero(plane.distances(pts) <= inlier_dist)
    logger.debug('plane n=%s d=%.3f with %d/%d inliers', plane.normal, plane.offset, len(inliers), n)
    return plane, inliers


def select_up_vector(plane: Plane, camera_centers) -> np.ndarray:
    """Return the plane normal pointing towards the cameras.

    The cameras of aerial images lie above the ground, so the up-vector is the
    normal with a positive projection onto the mean camera center, taken
    relative to the plane centroid.

    :param plane: fitted ground plane (either normal sign).
    :type plane: Plane
    :param camera_centers: (n, 3) camera centers, n >= 1.
    :type camera_centers: array_like
    :return: unit up-vector.
    :rtype: numpy.ndarray
    :raises UpVectorAmbiguityError: if the cameras lie in the plane.
    """
    centers = np.asarray(camera_centers, dtype=float).reshape(-1, 3)
    if len(centers) == 0:
        raise InvalidInputError('at least one camera center is required')
    offset = centers.mean(axis=0) - plane.anchor
    side = float(plane.normal @ offset)
    if side == 0.0 or abs(side) <= 1e-12 * max(1.0, float(np.linalg.norm(offset))):
        raise UpVectorAmbiguityError('cameras lie in the ground plane, the up-vector is ambiguous')
    return plane.normal.copy() if side > 0 else -plane.normal


def alignment_rotation(v_up) -> np.ndarray:
    """Return the minimal rotation R such that R v_up = +z.

    The axis is v_up x z and the angle the one between v_up and z. When
    v_up = -z the rotation is the half turn about x.

    :param v_up: unit up-vector.
    :type v_up: array_like
    :return: 3x3 rotation matrix.
    :rtype: numpy.ndarray
    """
    v = np.asarray(v_up, dtype=float).reshape(3)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or abs(norm - 1.0) > 1e-9:
        raise InvalidInputError(f'up-vector {v} is not a unit vector')
    v = v / norm
    axis = np.cross(v, _Z)
    s = float(np.linalg.norm(axis))
    c = float(v @ _Z)
    if s == 0.0:
        if c > 0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    k = axis / s
    kx = np.array([[0.0, -k[2], k[1]],
                   [k[2], 0.0, -k[0]],
                   [-k[1], k[0], 0.0]])
    # Rodrigues with sin / cos taken from the vectors, no round trip through an angle
    return np.eye(3) + s * kx + (1.0 - c) * (kx @ kx)


def apply_alignment(recon: Reconstruction, rotation, pivot=None) -> Reconstruction:
    """Rotate a reconstruction about a pivot.

    Points become R (x - pivot) + pivot. Each world to camera rotation is
    composed with R^T and the translations follow the moved camera centers,
    so every pixel reprojection is unchanged.

    :param recon: reconstruction to rotate.
    :type recon: Reconstruction
    :param rotation: 3x3 rotation matrix.
    :type rotation: array_like
    :param pivot: fixed point of the rotation, default origin.
    :type pivot: array_like, optional
    :return: rotated reconstruction.
    :rtype: Reconstruction
    """
    r = np.asarray(rotation, dtype=float).reshape(3, 3)
    if not np.allclose(r.T @ r, np.eye(3), atol=1e-9) or np.linalg.det(r) < 0:
        raise InvalidInputError('alignment matrix is not a rotation')
    p = np.zeros(3) if pivot is None else np.asarray(pivot, dtype=float).reshape(3)
    points = (recon.points - p) @ r.T + p
    shots: Dict[str, Shot] = {}
    for shot_id, shot in recon.shots.items():
        center = r @ (shot.center - p) + p
        moved = Shot.from_matrix(shot_id, shot.rotation_matrix @ r.T, np.zeros(3), shot.camera_id, shot.gps)
        shots[shot_id] = Shot(shot_id, moved.rotation, -moved.rotation_matrix @ center,
                              shot.camera_id, shot.gps)
    return Reconstruction(recon.origin, dict(recon.cameras), shots, points, dict(recon.observations))


def reprojection_residuals(recon: Reconstruction) -> Dict[str, np.ndarray]:
    """Return the pixel distance between each observation and the projection of its point."""
    residuals = {}
    for shot_id in sorted(recon.observations):
        obs = recon.observations[shot_id]
        if len(obs) == 0:
            residuals[shot_id] = np.empty(0)
            continue
        projected = recon.project(shot_id, recon.points[obs.point_ids])
        residuals[shot_id] = np.hypot(*(projected - obs.pixels).T)
    return residuals


def align_reconstruction(recon: Reconstruction, inlier_dist: float = DEFAULT_INLIER_DIST,
                         max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0) -> AlignmentResult:
    """Fit the ground plane, pick the up-vector and rotate the reconstruction so that it points to +z.

    The pivot of the rotation is the centroid of the plane inliers, so that
    the aligned ground plane is z = pivot_z.

    :param recon: reconstruction to align.
    :type recon: Reconstruction
    :return: aligned reconstruction and the intermediate quantities.
    :rtype: AlignmentResult
    """
    plane, inliers = fit_plane_ransac(recon.points, inlier_dist, max_iters, seed)
    v_up = select_up_vector(plane, recon.camera_centers())
    rotation = alignment_rotation(v_up)
    pivot = recon.points[inliers].mean(axis=0)
    aligned = apply_alignment(recon, rotation, pivot)
    tilt = np.degrees(np.arccos(np.clip(v_up @ _Z, -1.0, 1.0)))
    logger.info('ground plane: %d/%d inliers, up-vector tilted by %.2f deg',
                len(inliers), len(recon.points), tilt)
    return AlignmentResult(aligned, plane, inliers, v_up, rotation, pivot)
