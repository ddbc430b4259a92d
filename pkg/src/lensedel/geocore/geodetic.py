# -*- coding: utf-8 -*-
"""geodetic file.

File containing the geodetic types (:class:`GeoPoint`, :class:`EnuPoint`)
and the WGS84 geodetic <-> local East-North-Up conversions.

The forward conversion is the exact ellipsoidal chain
geodetic -> ECEF -> ENU computed by :mod:`pymap3d`. The inverse conversion
is polished by a few Newton steps on the forward chain so that a round trip
stays within a micrometer for points within 100 km of the origin.

.. module:: geodetic
   :synopsis: WGS84 geodetic to local tangent plane conversions.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import pymap3d

from lensedel.errors import InvalidInputError

logger = logging.getLogger(__name__)

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

# Newton polish of the inverse chain
_REFINE_STEPS = 4
_REFINE_TOL_M = 1e-10


@dataclass(frozen=True)
class GeoPoint:
    """Geodetic position on the WGS84 ellipsoid.

    :param lat: latitude in degrees, in [-90, 90].
    :type lat: float
    :param lon: longitude in degrees, in [-180, 180].
    :type lon: float
    :param alt: height above the ellipsoid in meters.
    :type alt: float
    """
    lat: float
    lon: float
    alt: float = 0.0

    def __post_init__(self):
        values = (self.lat, self.lon, self.alt)
        if not all(np.isfinite(v) for v in values):
            raise InvalidInputError(f'non-finite geodetic coordinates {values}')
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidInputError(f'latitude {self.lat} out of [-90, 90]')
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidInputError(f'longitude {self.lon} out of [-180, 180]')


@dataclass(frozen=True)
class EnuPoint:
    """Position in meters in the East-North-Up frame of a declared origin."""
    e: float
    n: float
    u: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.e, self.n, self.u)):
            raise InvalidInputError(f'non-finite ENU coordinates {(self.e, self.n, self.u)}')

    def as_array(self) -> np.ndarray:
        return np.array([self.e, self.n, self.u], dtype=float)


def geodetic_to_enu(p: GeoPoint, origin: GeoPoint) -> EnuPoint:
    """Convert a geodetic point into the ENU frame anchored at `origin`.

    :param p: point to convert.
    :type p: GeoPoint
    :param origin: origin of the ENU frame.
    :type origin: GeoPoint
    :return: ENU coordinates in meters.
    :rtype: EnuPoint
    """
    e, n, u = geodetic_to_enu_array(p.lat, p.lon, p.alt, origin)
    return EnuPoint(float(e), float(n), float(u))


def enu_to_geodetic(p: EnuPoint, origin: GeoPoint) -> GeoPoint:
    """Convert ENU coordinates back to a geodetic point (inverse of :func:`geodetic_to_enu`).

    :param p: ENU point.
    :type p: EnuPoint
    :param origin: origin of the ENU frame.
    :type origin: GeoPoint
    :return: geodetic point.
    :rtype: GeoPoint
    """
    lat, lon, alt = enu_to_geodetic_array(p.e, p.n, p.u, origin)
    return GeoPoint(float(lat), float(_wrap_lon(lon)), float(alt))


def geodetic_to_enu_array(lat, lon, alt, origin: GeoPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`geodetic_to_enu` on arrays of degrees / meters."""
    lat, lon, alt = (np.asarray(v, dtype=float) for v in (lat, lon, alt))
    _check_finite(lat, lon, alt)
    if np.any(np.abs(lat) > 90.0) or np.any(np.abs(lon) > 180.0):
        raise InvalidInputError('geodetic coordinates out of range')
    return pymap3d.geodetic2enu(lat, lon, alt, origin.lat, origin.lon, origin.alt)


def enu_to_geodetic_array(e, n, u, origin: GeoPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`enu_to_geodetic` on arrays of meters."""
    e, n, u = (np.asarray(v, dtype=float) for v in (e, n, u))
    _check_finite(e, n, u)
    lat, lon, alt = pymap3d.enu2geodetic(e, n, u, origin.lat, origin.lon, origin.alt)
    lat, lon, alt = (np.asarray(v, dtype=float) for v in (lat, lon, alt))
    for _ in range(_REFINE_STEPS):
        fe, fn, fu = pymap3d.geodetic2enu(lat, lon, alt, origin.lat, origin.lon, origin.alt)
        de, dn, du = e - fe, n - fn, u - fu
        if max(np.max(np.abs(de)), np.max(np.abs(dn)), np.max(np.abs(du))) < _REFINE_TOL_M:
            break
        sin_lat = np.sin(np.radians(lat))
        w = np.sqrt(1.0 - WGS84_E2 * sin_lat ** 2)
        radius_n = WGS84_A / w
        radius_m = WGS84_A * (1.0 - WGS84_E2) / w ** 3
        lat = lat + np.degrees(dn / (radius_m + alt))
        lon = lon + np.degrees(de / ((radius_n + alt) * np.cos(np.radians(lat))))
        alt = alt + du
    return lat, _wrap_lon(lon), alt


def enu_origin(points: Iterable[GeoPoint]) -> GeoPoint:
    """Return the anchor of the scene ENU frame: horizontal centroid of the GPS tags at mean altitude.

    :param points: GPS tags of the images.
    :type points: Iterable[GeoPoint]
    :return: the origin of the ENU frame.
    :rtype: GeoPoint
    """
    pts = list(points)
    if not pts:
        raise InvalidInputError('no GPS tag to anchor the ENU frame')
    first = pts[0]
    # centroid taken in the tangent plane of the first tag, exact for any scene size
    e, n, u = geodetic_to_enu_array([p.lat for p in pts], [p.lon for p in pts],
                                    [p.alt for p in pts], first)
    lat, lon, _ = enu_to_geodetic_array(np.mean(e), np.mean(n), 0.0, first)
    return GeoPoint(float(lat), float(_wrap_lon(lon)), float(np.mean([p.alt for p in pts])))


def _wrap_lon(lon):
    return (np.asarray(lon) + 180.0) % 360.0 - 180.0 if np.any(np.abs(lon) > 180.0) else lon


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidInputError('non-finite coordinate')


if __name__ == "__main__":
    baton_rouge = GeoPoint(30.45, -91.15, 0.0)
    moved = GeoPoint(30.45 + 1e-5, -91.15, 0.0)
    enu = geodetic_to_enu(moved, baton_rouge)
    print(enu)
    print(enu_to_geodetic(enu, baton_rouge))
