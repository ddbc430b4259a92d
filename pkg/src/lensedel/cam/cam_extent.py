# -*- coding: utf-8 -*-
"""cam_extent file.

File containing the extraction of damage polygons from class activation maps.

The activation map of the target class is the weighted sum of the channels
of the last convolution layer of the classifier. It is upsampled to the
image resolution, thresholded, and the foreground is traced into polygons
(Suzuki-Abe border following, as implemented by OpenCV).

.. module:: cam_extent
   :synopsis: class activation map, mask and polygon tracing.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List

import cv2
import numpy as np
from scipy import ndimage
import shapely
from shapely.geometry import LineString, box
from shapely.geometry.polygon import orient

from lensedel.errors import InvalidInputError, ShapeMismatchError
from lensedel.geocore.polygons import Polygon2D, ring_signed_area

logger = logging.getLogger(__name__)

DEFAULT_TAU = 0.0
DEFAULT_MIN_PIXELS = 25


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Activations f_k(x, y) of the K channels, (K, H', W') array."""
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float32)
        if v.ndim != 3 or min(v.shape) < 1:
            raise ShapeMismatchError(f'feature map must be a non-empty (K, H, W) array, got shape {v.shape}')
        if not np.all(np.isfinite(v)):
            raise InvalidInputError('non-finite feature map value')
        v.flags.writeable = False
        object.__setattr__(self, 'values', v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class ClassWeights:
    """Weights w_k of the target class, one per channel."""
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if len(v) < 1:
            raise ShapeMismatchError('class weights are empty')
        if not np.all(np.isfinite(v)):
            raise InvalidInputError('non-finite class weight')
        v.flags.writeable = False
        object.__setattr__(self, 'values', v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ImagePolygon:
    """Traced region of a mask.

    :param polygon: outline in pixel coordinates.
    :type polygon: Polygon2D
    :param pixel_area: number of mask pixels of the region.
    :type pixel_area: int
    """
    polygon: Polygon2D
    pixel_area: int


def _weights(w) -> np.ndarray:
    return w.values if isinstance(w, ClassWeights) else ClassWeights(w).values


def _features(f) -> np.ndarray:
    return f.values if isinstance(f, FeatureMap) else FeatureMap(f).values


def compute_cam(f, w) -> np.ndarray:
    """Compute the class activation map M = sum_k w_k f_k.

    The sum is accumulated in double precision, channel after channel in
    index order, so that the result does not depend on the vectorization.

    :param f: feature map, (K, H', W').
    :type f: FeatureMap or numpy.ndarray
    :param w: class weights, (K,).
    :type w: ClassWeights or array_like
    :return: (H', W') activation grid.
    :rtype: numpy.ndarray
    :raises ShapeMismatchError: if the channel counts differ.
    """
    fv = _features(f)
    wv = _weights(w)
    if fv.shape[0] != len(wv):
        raise ShapeMismatchError(f'{fv.shape[0]} feature channels but {len(wv)} class weights')
    m = np.zeros(fv.shape[1:], dtype=np.float64)
    for k in range(len(wv)):
        m += wv[k] * fv[k].astype(np.float64)
    return m


def class_score(m: np.ndarray) -> float:
    """Class score S = sum of the activation grid."""
    return float(np.sum(np.asarray(m, dtype=np.float64)))


def is_damaged(f, w) -> bool:
    """Return True when the class score of the activation map of an image is positive.

    :param f: feature map of the image.
    :type f: FeatureMap or numpy.ndarray
    :param w: weights of the damage class.
    :type w: ClassWeights or array_like
    :rtype: bool
    """
    return class_score(compute_cam(f, w)) > 0


def threshold_mask(m: np.ndarray, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Return the boolean mask M >= tau (inclusive)."""
    return np.asarray(m) >= tau


def upsample(m: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resampling of a grid to width x height, corners aligned.

    The corner cells of the input land on the corner pixels of the output:
    output column j samples the input at j (W' - 1) / (W - 1).

    :param m: (H', W') grid.
    :type m: numpy.ndarray
    :param width: output width W.
    :type width: int
    :param height: output height H.
    :type height: int
    :return: (H, W) grid.
    :rtype: numpy.ndarray
    :raises InvalidInputError: if W or H is not positive.
    """
    grid = np.asarray(m, dtype=np.float64)
    if grid.ndim != 2 or min(grid.shape) < 1:
        raise ShapeMismatchError(f'activation grid must be a non-empty 2D array, got shape {grid.shape}')
    if width <= 0 or height <= 0:
        raise InvalidInputError(f'output size {width}x{height} must be positive')
    rows = np.linspace(0.0, grid.shape[0] - 1, height) if height > 1 else np.zeros(1)
    cols = np.linspace(0.0, grid.shape[1] - 1, width) if width > 1 else np.zeros(1)
    rr, cc = np.meshgrid(rows, cols, indexing='ij')
    return ndimage.map_coordinates(grid, [rr, cc], order=1, mode='nearest')


def _outline_of_thin_component(pixels: np.ndarray) -> np.ndarray:
    """Outline of a component whose border walk encloses no area (lines, single pixels).

    Union of the unit squares of the pixels. Diagonal neighbours only share a
    corner, so each diagonal link is bridged by a one pixel wide band.

    :param pixels: (n, 2) array of the (x, y) pixel centers of the component.
    :type pixels: numpy.ndarray
    :return: exterior ring of the outline.
    :rtype: numpy.ndarray
    """
    cells = {(int(x), int(y)) for x, y in pixels}
    shapes = [box(x - 0.5, y - 0.5, x + 0.5, y + 0.5) for x, y in cells]
    for x, y in cells:
        for dx, dy in ((1, 1), (1, -1)):
            if (x + dx, y + dy) in cells:
                shapes.append(LineString([(x, y), (x + dx, y + dy)]).buffer(0.5, cap_style='flat'))
    outline = orient(shapely.union_all(shapes), 1.0)
    return np.asarray(outline.exterior.coords)


def trace_polygons(mask: np.ndarray) -> List[ImagePolygon]:
    """Trace the outer border of each 8-connected foreground component.

    Borders go through the centers of the border pixels (Suzuki-Abe border
    following), holes are ignored. Components reduced to lines or single
    pixels are outlined by the union of their pixel squares instead. Polygons are
    ordered by the raster-scan position of the first pixel of their component.

    :param mask: (H, W) boolean mask.
    :type mask: numpy.ndarray
    :return: one polygon per component.
    :rtype: list[ImagePolygon]
    """
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2 or min(m.shape) < 1:
        raise ShapeMismatchError(f'mask must be a non-empty 2D array, got shape {m.shape}')
    if not m.any():
        return []
    padded = np.pad(m, 1).astype(np.uint8)
    count, labels = cv2.connectedComponents(padded, connectivity=8)
    pixel_areas = np.bincount(labels.ravel(), minlength=count)
    labels_found, first = np.unique(labels.ravel(), return_index=True)
    raster_order = dict(zip(labels_found.tolist(), first.tolist()))

    contours, hierarchy = cv2.findContours(padded, cv2.RETR_CCOMP, cv2.CHAIN_APPROX_SIMPLE)[-2:]
    boxes = ndimage.find_objects(labels)
    outlines = {}
    for contour, info in zip(contours, hierarchy[0]):
        if info[3] != -1:
            continue
        pts = contour.reshape(-1, 2)
        label = int(labels[pts[0, 1], pts[0, 0]])
        ring = pts.astype(np.float64) - 1.0
        if len(ring) < 3 or ring_signed_area(ring) == 0.0:
            window = boxes[label - 1]
            rows, cols = np.nonzero(labels[window] == label)
            ring = _outline_of_thin_component(np.column_stack([cols + window[1].start - 1.0,
                                                               rows + window[0].start - 1.0]))
        outlines[label] = Polygon2D.from_points(ring)

    polygons = [ImagePolygon(outlines[label], int(pixel_areas[label]))
                for label in sorted(outlines, key=raster_order.get)]
    logger.debug('traced %d regions on a %dx%d mask', len(polygons), m.shape[1], m.shape[0])
    return polygons


def min_region_filter(polys: List[ImagePolygon], min_pixels: int = DEFAULT_MIN_PIXELS) -> List[ImagePolygon]:
    """Keep the regions holding at least `min_pixels` mask pixels."""
    return [p for p in polys if p.pixel_area >= min_pixels]


def extract_damage_polygons(f, w, width: int, height: int, tau: float = DEFAULT_TAU,
                            min_pixels: int = DEFAULT_MIN_PIXELS) -> List[ImagePolygon]:
    """Damage polygons of an image, in pixels.

    Activation map, bilinear upsampling to the image size, threshold,
    tracing, then removal of the small regions.

    :param f: feature map of the image.
    :type f: FeatureMap or numpy.ndarray
    :param w: weights of the damage class.
    :type w: ClassWeights or array_like
    :param width: image width, pixels.
    :type width: int
    :param height: image height, pixels.
    :type height: int
    :param tau: activation threshold.
    :type tau: float
    :param min_pixels: smallest region kept, in pixels.
    :type min_pixels: int
    :return: damage regions of the image.
    :rtype: list[ImagePolygon]
    """
    cam = compute_cam(f, w)
    mask = threshold_mask(upsample(cam, width, height), tau)
    return min_region_filter(trace_polygons(mask), min_pixels)


if __name__ == "__main__":
    demo = np.zeros((12, 16), dtype=bool)
    demo[2:7, 3:13] = True
    demo[9, 1:4] = True
    for region in trace_polygons(demo):
        print(region.pixel_area, region.polygon.exterior.tolist())
