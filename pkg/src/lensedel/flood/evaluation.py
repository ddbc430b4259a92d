# -*- coding: utf-8 -*-
"""evaluation file.

File containing the precision metrics of the flood estimates against a
reference flood extent, known only inside an administrative boundary.

Three estimates are compared:

* ``gps``: the GPS tags of the flood images (points),
* ``footprint``: the union of the footprints of the flood images,
* ``cam``: the union of the projected damage polygons of the flood images.

Area estimates are dissolved before any ratio is computed, so overlapping
images are never counted twice. Recall is not computed: the reference is
unknown outside the boundary.

.. module:: evaluation
   :synopsis: precision of the flood estimates.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from lensedel.errors import EvaluationError, InvalidInputError
from lensedel.flood.footprint_filter import FilterConfig, Footprint, apply_filters
from lensedel.geocore.polygons import (AnyPolygon, MultiPolygon2D, difference, intersection,
                                       multipolygon_area, points_in_multipolygon, union)
from lensedel.worker_pool import WorkerPool

logger = logging.getLogger(__name__)

METHODS = ('gps', 'footprint', 'cam')
M2_PER_KM2 = 1e6


@dataclass(frozen=True, eq=False)
class FloodEstimate:
    """Flood estimate of one method.

    :param method: ``gps``, ``footprint`` or ``cam``.
    :type method: str
    :param polygons: world polygons per image (empty for ``gps``).
    :type polygons: dict[str, list[AnyPolygon]]
    :param points: GPS tag of each image, ENU meters.
    :type points: dict[str, tuple[float, float]]
    """
    method: str
    polygons: Dict[str, List[AnyPolygon]] = field(default_factory=dict)
    points: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f'unknown estimation method {self.method!r}, expected one of {METHODS}')
        if self.method == 'gps' and any(self.polygons.values()):
            raise InvalidInputError('a gps estimate holds no polygon')

    def all_polygons(self) -> List[AnyPolygon]:
        """Polygons of every image, in image id order."""
        return [p for key in sorted(self.polygons) for p in self.polygons[key]]

    def dissolved(self) -> MultiPolygon2D:
        return union(self.all_polygons())


@dataclass(frozen=True)
class PrecisionReport:
    """Precision of an estimate.

    :param method: estimation method.
    :param precision: numerator / denominator, in [0, 1].
    :param numerator: points in the reference, or km2 overlapping it.
    :param denominator: points in the boundary, or km2 of the estimate in the boundary.
    :param image_count: number of images contributing to the estimate.
    """
    method: str
    precision: float
    numerator: float
    denominator: float
    image_count: int

    def as_dict(self) -> dict:
        return {'method': self.method, 'precision': self.precision, 'numerator': self.numerator,
                'denominator': self.denominator, 'image_count': self.image_count}


@dataclass(frozen=True, eq=False)
class LocalizedImage:
    """Georeferenced flood image, input of :func:`precision_sweep`.

    :param image_id: image identifier.
    :param footprint: ground footprint of the image.
    :param cam_polygons: projected damage polygons, clipped to the footprint.
    """
    image_id: str
    footprint: Footprint
    cam_polygons: Tuple[AnyPolygon, ...] = ()


@dataclass(frozen=True)
class SweepCell:
    """Cell of a threshold sweep. A report is None when the estimate is empty in the boundary."""
    max_aspect_ratio: float
    max_area_km2: float
    retained: int
    footprint: Optional[PrecisionReport]
    cam: Optional[PrecisionReport]


def gps_precision(points, truth: AnyPolygon, boundary: AnyPolygon, method: str = 'gps') -> PrecisionReport:
    """Fraction of the GPS tags inside the boundary that fall in the reference extent.

    :param points: (n, 2) GPS tags of the flood images, ENU meters.
    :type points: array_like
    :param truth: reference flood extent.
    :type truth: MultiPolygon2D
    :param boundary: administrative boundary.
    :type boundary: MultiPolygon2D
    :return: point-count precision.
    :rtype: PrecisionReport
    :raises EvaluationError: if no point lies inside the boundary.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    inside = pts[points_in_multipolygon(pts, boundary)] if len(pts) else pts
    if len(inside) == 0:
        raise EvaluationError('no GPS tag lies inside the boundary')
    hits = int(np.count_nonzero(points_in_multipolygon(inside, truth)))
    return PrecisionReport(method, hits / len(inside), float(hits), float(len(inside)), len(inside))


def area_precision(polygons: Iterable[AnyPolygon], truth: AnyPolygon, boundary: AnyPolygon,
                   method: str = '', image_count: Optional[int] = None) -> PrecisionReport:
    """Fraction of the dissolved estimate area, inside the boundary, that overlaps the reference.

    The estimate polygons are merged first, then clipped to the boundary.

    :param polygons: estimate polygons (any partition of the estimate).
    :type polygons: Iterable[AnyPolygon]
    :param truth: reference flood extent.
    :type truth: MultiPolygon2D
    :param boundary: administrative boundary.
    :type boundary: MultiPolygon2D
    :param method: method stored in the report.
    :type method: str
    :param image_count: number of images stored in the report, default number of polygons.
    :type image_count: int
    :return: area precision, numerator and denominator in km2.
    :rtype: PrecisionReport
    :raises EvaluationError: if the estimate has no area inside the boundary.
    """
    polygons = list(polygons)
    clipped = intersection(union(polygons), boundary)
    denominator = multipolygon_area(clipped)
    if denominator <= 0.0:
        raise EvaluationError(f'{method or "estimate"}: no area inside the boundary')
    numerator = min(multipolygon_area(intersection(clipped, truth)), denominator)
    count = len(polygons) if image_count is None else image_count
    return PrecisionReport(method, numerator / denominator, numerator / M2_PER_KM2,
                           denominator / M2_PER_KM2, count)


def overlap_regions(polygons: Iterable[AnyPolygon], truth: AnyPolygon,
                    boundary: AnyPolygon) -> Tuple[MultiPolygon2D, MultiPolygon2D]:
    """Split the dissolved estimate, inside the boundary, into true and false positive regions."""
    clipped = intersection(union(list(polygons)), boundary)
    return intersection(clipped, truth), difference(clipped, truth)


def flood_coverage(truth: AnyPolygon, boundary: AnyPolygon) -> Tuple[float, float]:
    """Flooded area inside the boundary (km2) and its fraction of the boundary area."""
    total = multipolygon_area(boundary)
    if total <= 0.0:
        raise EvaluationError('boundary has no area')
    flooded = multipolygon_area(intersection(truth, boundary))
    return flooded / M2_PER_KM2, flooded / total


def _try_precision(polygons, truth, boundary, method, count) -> Optional[PrecisionReport]:
    try:
        return area_precision(polygons, truth, boundary, method, count)
    except EvaluationError as e:
        logger.debug('%s', e)
        return None


def precision_sweep(images: Sequence[LocalizedImage], ratios: Sequence[float], areas: Sequence[float],
                    truth: AnyPolygon, boundary: AnyPolygon, workers: int = 1) -> List[List[SweepCell]]:
    """Precision of the footprint and CAM estimates over a grid of filter thresholds.

    The footprint filters are applied again for each cell, the retained
    images make both estimates.

    :param images: georeferenced flood images.
    :type images: Sequence[LocalizedImage]
    :param ratios: aspect ratio thresholds (rows of the table).
    :type ratios: Sequence[float]
    :param areas: area thresholds in km2 (columns of the table).
    :type areas: Sequence[float]
    :param truth: reference flood extent.
    :type truth: MultiPolygon2D
    :param boundary: administrative boundary.
    :type boundary: MultiPolygon2D
    :param workers: number of cells evaluated at the same time.
    :type workers: int
    :return: len(ratios) x len(areas) table of cells.
    :rtype: list[list[SweepCell]]
    """
    by_id = {img.image_id: img for img in images}
    footprints = [img.footprint for img in images]

    def evaluate(thresholds) -> SweepCell:
        ratio, area = thresholds
        retained = apply_filters(footprints, FilterConfig(max_area_km2=area, max_aspect_ratio=ratio))
        kept = [by_id[fp.image_id] for fp in retained]
        fp_report = _try_precision([img.footprint.polygon for img in kept], truth, boundary,
                                   'footprint', len(kept))
        cam_report = _try_precision([p for img in kept for p in img.cam_polygons], truth, boundary,
                                    'cam', len(kept))
        return SweepCell(ratio, area, len(kept), fp_report, cam_report)

    grid = [(r, a) for r in ratios for a in areas]
    outcomes = WorkerPool(workers).run(evaluate, [(f'{r}x{a}', (r, a)) for r, a in grid])
    for outcome in outcomes:
        if not outcome.ok:
            raise outcome.error
    cells = [o.value for o in outcomes]
    return [cells[i * len(areas):(i + 1) * len(areas)] for i in range(len(ratios))]
