# -*- coding: utf-8 -*-
"""homography file.

File containing the image to world projective transformation of an image.

The ground seen by an aerial image is nearly flat, so pixels and ground
coordinates are related by a homography. It is estimated by the normalized
direct linear transform inside RANSAC, on the matches between the pixels of
an image and the reconstructed points (aligned, height dropped).

.. module:: homography
   :synopsis: image to ground homography estimation and projection.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from lensedel.errors import (ConsensusError, DegenerateConfigurationError,
                             GeometryError, HorizonError, InvalidInputError)
from lensedel.geocore.polygons import Polygon2D
from lensedel.sfm.ransac import adaptive_trials
from lensedel.sfm.reconstruction import Reconstruction

logger = logging.getLogger(__name__)

DEFAULT_INLIER_DIST = 5.0
DEFAULT_MAX_ITERS = 2000
DEFAULT_CONFIDENCE = 0.999
RETAIN_MIN_INLIER_RATIO = 0.20
SAMPLE_SIZE = 4
HORIZON_EPS = 1e-10
_RANK_TOL = 1e-8


@dataclass(frozen=True)
class Correspondence:
    """Match between an image point (pixels) and a ground point (ENU meters)."""
    u: float
    v: float
    x: float
    y: float

    def __post_init__(self):
        if not all(np.isfinite(c) for c in (self.u, self.v, self.x, self.y)):
            raise InvalidInputError('non-finite correspondence')


class Homography:
    """3x3 projective map from pixels to ground coordinates.

    The matrix is stored with unit Frobenius norm and a positive bottom-right
    entry (when non-zero), so that equal maps have equal matrices.

    :param matrix: 3x3 matrix, any scale.
    :type matrix: array_like
    """

    def __init__(self, matrix):
        h = np.array(matrix, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(h)):
            raise InvalidInputError('non-finite homography')
        norm = np.linalg.norm(h)
        if norm == 0.0:
            raise DegenerateConfigurationError('zero homography matrix')
        h = h / norm
        pivot = h[2, 2] if abs(h[2, 2]) > 1e-15 else h.flat[np.flatnonzero(np.abs(h) > 1e-15)[0]]
        if pivot < 0:
            h = -h
        if abs(np.linalg.det(h)) <= 1e-12:
            raise DegenerateConfigurationError('singular homography')
        h.flags.writeable = False
        self.matrix = h

    def __repr__(self) -> str:
        return f'Homography({self.matrix.tolist()})'


@dataclass(frozen=True)
class GeorefResult:
    """Result of the RANSAC estimation of the homography of one image.

    :param image_id: image identifier.
    :param homography: refit homography.
    :param inlier_ratio: inliers / correspondences.
    :param inlier_count: number of inliers.
    :param rms_error: RMS ground distance of the inliers, meters.
    :param inliers: indices of the inlier correspondences.
    """
    image_id: str
    homography: Homography
    inlier_ratio: float
    inlier_count: int
    rms_error: float
    inliers: tuple = ()


def _as_arrays(corrs) -> np.ndarray:
    if isinstance(corrs, np.ndarray):
        arr = np.asarray(corrs, dtype=float).reshape(-1, 4)
    else:
        arr = np.array([[c.u, c.v, c.x, c.y] for c in corrs], dtype=float).reshape(-1, 4)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError('non-finite correspondence')
    return arr


def _normalization(points: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to 0 and the mean distance to sqrt(2)."""
    centroid = points.mean(axis=0)
    mean_dist = np.mean(np.hypot(*(points - centroid).T))
    if mean_dist <= 0.0:
        raise DegenerateConfigurationError('all points coincide')
    s = np.sqrt(2.0) / mean_dist
    return np.array([[s, 0.0, -s * centroid[0]],
                     [0.0, s, -s * centroid[1]],
                     [0.0, 0.0, 1.0]])


def _dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    t_src = _normalization(src)
    t_dst = _normalization(dst)
    a = src @ t_src[:2, :2].T + t_src[:2, 2]
    b = dst @ t_dst[:2, :2].T + t_dst[:2, 2]
    n = len(a)
    x, y = a[:, 0], a[:, 1]
    xp, yp = b[:, 0], b[:, 1]
    zeros, ones = np.zeros(n), np.ones(n)
    design = np.empty((2 * n, 9))
    design[0::2] = np.stack([zeros, zeros, zeros, -x, -y, -ones, yp * x, yp * y, yp], axis=1)
    design[1::2] = np.stack([x, y, ones, zeros, zeros, zeros, -xp * x, -xp * y, -xp], axis=1)
    _, sv, vt = np.linalg.svd(design)
    rank = int(np.count_nonzero(sv > _RANK_TOL * sv[0]))
    if rank < 8:
        raise DegenerateConfigurationError(f'design matrix rank {rank} < 8')
    h_norm = vt[-1].reshape(3, 3)
    return np.linalg.inv(t_dst) @ h_norm @ t_src


def estimate_dlt(corrs: Union[Sequence[Correspondence], np.ndarray]) -> Homography:
    """Estimate a homography by the normalized direct linear transform.

    Both point sets are normalized (centroid at the origin, mean distance
    sqrt(2)); the solution is the right singular vector of the smallest
    singular value of the 2n x 9 design matrix.

    :param corrs: at least 4 correspondences, or an (n, 4) array of (u, v, x, y).
    :type corrs: Sequence[Correspondence] or numpy.ndarray
    :return: homography from pixels to ground.
    :rtype: Homography
    :raises GeometryError: fewer than 4 correspondences.
    :raises DegenerateConfigurationError: rank-deficient configuration.
    """
    arr = _as_arrays(corrs)
    if len(arr) < SAMPLE_SIZE:
        raise GeometryError(f'homography estimation needs at least 4 correspondences, got {len(arr)}')
    return Homography(_dlt(arr[:, :2], arr[:, 2:]))


def _transfer(h: np.ndarray, pixels: np.ndarray):
    """Project pixels, returning ground points and a validity mask (finite, away from the horizon)."""
    p = np.column_stack([pixels, np.ones(len(pixels))])
    q = p @ h.T
    scale = np.linalg.norm(h) * np.linalg.norm(p, axis=1)
    valid = np.abs(q[:, 2]) >= HORIZON_EPS * scale
    w = np.where(valid, q[:, 2], 1.0)
    return q[:, :2] / w[:, None], valid


def _residuals(h: np.ndarray, arr: np.ndarray) -> np.ndarray:
    ground, valid = _transfer(h, arr[:, :2])
    err = np.hypot(*(ground - arr[:, 2:]).T)
    return np.where(valid, err, np.inf)


def _has_collinear_triplet(pixels: np.ndarray) -> bool:
    scale = max(1.0, float(np.ptp(pixels)) ** 2)
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        d1 = pixels[j] - pixels[i]
        d2 = pixels[k] - pixels[i]
        if abs(d1[0] * d2[1] - d1[1] * d2[0]) <= 1e-9 * scale:
            return True
    return False


def estimate_ransac(corrs, inlier_dist: float = DEFAULT_INLIER_DIST,
                    max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0,
                    image_id: str = '', confidence: float = DEFAULT_CONFIDENCE) -> GeorefResult:
    """Estimate a homography robustly.

    Minimal samples of 4 correspondences are drawn until `max_iters` or the
    adaptive bound for `confidence` is reached. The best consensus set
    (ground distance <= `inlier_dist`) is refit by DLT, then the inliers are
    classified again with the refit model.

    :param corrs: correspondences, or an (n, 4) array of (u, v, x, y).
    :type corrs: Sequence[Correspondence] or numpy.ndarray
    :param inlier_dist: inlier threshold in ground meters.
    :type inlier_dist: float
    :param max_iters: maximal number of minimal samples.
    :type max_iters: int
    :param seed: seed of the random generator.
    :type seed: int
    :param image_id: identifier stored in the result.
    :type image_id: str
    :return: refit homography and its inlier statistics.
    :rtype: GeorefResult
    :raises GeometryError: fewer than 4 correspondences.
    :raises ConsensusError: no model with at least 4 inliers.
    """
    arr = _as_arrays(corrs)
    n = len(arr)
    if n < SAMPLE_SIZE:
        raise GeometryError(f'homography estimation needs at least 4 correspondences, got {n}')
    rng = np.random.default_rng(seed)
    best_mask = None
    best_count = 0
    trials = 0
    needed = float(max_iters)
    while trials < min(max_iters, needed):
        trials += 1
        sample = arr[rng.choice(n, SAMPLE_SIZE, replace=False)]
        if _has_collinear_triplet(sample[:, :2]) or _has_collinear_triplet(sample[:, 2:]):
            continue
        try:
            h = _dlt(sample[:, :2], sample[:, 2:])
        except (DegenerateConfigurationError, np.linalg.LinAlgError):
            continue
        mask = _residuals(h, arr) <= inlier_dist
        count = int(np.count_nonzero(mask))
        if count > best_count:
            best_count, best_mask = count, mask
            needed = adaptive_trials(count / n, SAMPLE_SIZE, confidence)
    if best_mask is None or best_count < SAMPLE_SIZE:
        raise ConsensusError(f'image {image_id!r}: no homography with at least 4 inliers '
                             f'after {trials} samples')

    try:
        refit = _dlt(arr[best_mask, :2], arr[best_mask, 2:])
        mask = _residuals(refit, arr) <= inlier_dist
        if np.count_nonzero(mask) >= SAMPLE_SIZE and not np.array_equal(mask, best_mask):
            refit = _dlt(arr[mask, :2], arr[mask, 2:])
            mask = _residuals(refit, arr) <= inlier_dist
        homography = Homography(refit)
    except (DegenerateConfigurationError, np.linalg.LinAlgError) as e:
        raise ConsensusError(f'image {image_id!r}: degenerate consensus set ({e})') from e
    residuals = _residuals(homography.matrix, arr)
    mask = residuals <= inlier_dist
    count = int(np.count_nonzero(mask))
    if count < SAMPLE_SIZE:
        raise ConsensusError(f'image {image_id!r}: refit model keeps {count} inliers')
    rms = float(np.sqrt(np.mean(residuals[mask] ** 2)))
    logger.debug('image %s: %d/%d inliers after %d samples, rms %.3f m',
                 image_id, count, n, trials, rms)
    return GeorefResult(image_id, homography, count / n, count, rms, tuple(np.flatnonzero(mask).tolist()))


def retain_gate(result: GeorefResult, min_ratio: float = RETAIN_MIN_INLIER_RATIO) -> bool:
    """Return True if at least `min_ratio` of the matches are inliers (boundary included)."""
    return result.inlier_ratio >= min_ratio


def project_point(h: Homography, point) -> np.ndarray:
    """Project a pixel (u, v) onto the ground.

    :param h: image to ground homography.
    :type h: Homography
    :param point: pixel (u, v).
    :type point: array_like
    :return: ground point (x, y) in meters.
    :rtype: numpy.ndarray
    :raises HorizonError: if the pixel maps to infinity.
    """
    ground, valid = _transfer(h.matrix, np.asarray(point, dtype=float).reshape(1, 2))
    if not valid[0]:
        raise HorizonError(f'pixel {tuple(point)} maps to infinity')
    return ground[0]


def project_polygon(h: Homography, poly: Polygon2D) -> Polygon2D:
    """Project an image polygon onto the ground, vertex by vertex.

    A projective map sends segments to segments as long as the polygon does
    not cross the horizon line h3.p = 0, so the vertices are enough.

    :param h: image to ground homography.
    :type h: Homography
    :param poly: polygon in pixels.
    :type poly: Polygon2D
    :return: polygon in ground meters.
    :rtype: Polygon2D
    :raises HorizonError: a vertex maps to infinity, or the polygon straddles the horizon line.
    """
    pixels = poly.exterior
    p = np.column_stack([pixels, np.ones(len(pixels))])
    w = p @ h.matrix[2]
    ground, valid = _transfer(h.matrix, pixels)
    if not np.all(valid):
        raise HorizonError('a polygon vertex maps to infinity')
    if np.any(w > 0) and np.any(w < 0):
        raise HorizonError('polygon straddles the horizon line')
    holes = []
    for hole in poly.holes:
        hg, hv = _transfer(h.matrix, hole)
        hw = np.column_stack([hole, np.ones(len(hole))]) @ h.matrix[2]
        if not np.all(hv) or np.any(np.sign(hw) != np.sign(w[0])):
            raise HorizonError('polygon hole straddles the horizon line')
        holes.append(hg)
    return Polygon2D.from_points(ground, holes)


def ground_correspondences(recon: Reconstruction, shot_id: str) -> np.ndarray:
    """Return the (n, 4) array of (u, v, x, y) matches of a shot.

    The reconstruction must be aligned: the ground coordinates are the
    (x, y) of the observed points, their height dropped.
    """
    obs = recon.observations_of(shot_id)
    ground = recon.points[obs.point_ids, :2]
    return np.column_stack([obs.pixels, ground]) if len(obs) else np.empty((0, 4))
