# -*- coding: utf-8 -*-
"""footprint_filter file.

File containing the ground footprint of an image and the retention
heuristics applied to footprints.

Images looking close to the horizon are badly described by a single
homography: their footprint becomes extremely large or extremely
elongated. They are discarded on the area of the footprint and on the
aspect ratio of its minimum-area rectangle.

.. module:: footprint_filter
   :synopsis: image footprints and area / aspect ratio filters.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List

from lensedel.errors import ConfigError
from lensedel.geocore.polygons import Polygon2D, min_area_rect, polygon_area
from lensedel.sfm.homography import Homography, project_polygon
from lensedel.sfm.reconstruction import CameraModel

logger = logging.getLogger(__name__)

M2_PER_KM2 = 1e6


@dataclass(frozen=True, eq=False)
class Footprint:
    """Projection of the image border onto the ground.

    :param image_id: image identifier.
    :type image_id: str
    :param polygon: projected image corners, ENU meters.
    :type polygon: Polygon2D
    :param area_km2: area of the footprint in square kilometers.
    :type area_km2: float
    :param aspect_ratio: long side / short side of the minimum-area rectangle.
    :type aspect_ratio: float
    """
    image_id: str
    polygon: Polygon2D
    area_km2: float
    aspect_ratio: float


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds of the footprint filters.

    :param max_area_km2: largest footprint area retained.
    :param max_aspect_ratio: largest aspect ratio retained.
    """
    max_area_km2: float = 5.0
    max_aspect_ratio: float = 4.0

    def __post_init__(self):
        if not self.max_area_km2 > 0:
            raise ConfigError(f'max_area_km2 must be positive, got {self.max_area_km2}')
        if not self.max_aspect_ratio > 0:
            raise ConfigError(f'max_aspect_ratio must be positive, got {self.max_aspect_ratio}')


def image_footprint(h: Homography, cam: CameraModel, image_id: str = '') -> Footprint:
    """Project the four image corners onto the ground.

    :param h: image to ground homography.
    :type h: Homography
    :param cam: camera model, giving the image size.
    :type cam: CameraModel
    :param image_id: identifier stored in the footprint.
    :type image_id: str
    :return: footprint with its area and aspect ratio.
    :rtype: Footprint
    :raises HorizonError: if a corner lies at or beyond the horizon.
    :raises GeometryError: if the footprint is degenerate.
    """
    poly = project_polygon(h, Polygon2D(cam.corners()))
    _, long_side, short_side = min_area_rect(poly)
    return Footprint(image_id, poly, polygon_area(poly) / M2_PER_KM2, long_side / short_side)


def passes_filters(fp: Footprint, cfg: FilterConfig) -> bool:
    """True if neither threshold is strictly exceeded."""
    return fp.area_km2 <= cfg.max_area_km2 and fp.aspect_ratio <= cfg.max_aspect_ratio


def apply_filters(footprints: Iterable[Footprint], cfg: FilterConfig) -> List[Footprint]:
    """Retain the footprints within both thresholds.

    Only a strict exceedance rejects: a footprint of exactly `max_area_km2`
    is retained. The input order is kept.
    """
    footprints = list(footprints)
    retained = [fp for fp in footprints if passes_filters(fp, cfg)]
    logger.debug('%d/%d footprints retained (area <= %g km2, ratio <= %g)',
                 len(retained), len(footprints), cfg.max_area_km2, cfg.max_aspect_ratio)
    return retained
