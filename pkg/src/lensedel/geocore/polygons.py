# -*- coding: utf-8 -*-
"""polygons file.

File containing the planar polygon types and the 2D geometry used by the
downstream stages: shoelace area, convex hull, minimum-area rectangle,
boolean operations and point containment.

Boolean operations (intersection, union, difference) are delegated to
:mod:`shapely` (GEOS overlay). Shared vertices and collinear edges are
handled by the overlay itself, so no perturbation of the input is applied.

.. module:: polygons
   :synopsis: 2D polygon geometry in the ENU plane.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
import shapely
from scipy.spatial import ConvexHull
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.base import BaseGeometry

try:
    from scipy.spatial import QhullError
except ImportError:  # scipy < 1.8
    from scipy.spatial.qhull import QhullError

from lensedel.errors import GeometryError

logger = logging.getLogger(__name__)

# rings shorter than this (in meters or pixels) are considered collapsed
_EPS_AREA = 1e-12
_BOUNDARY_TOL = 1e-9


def _clean_ring(points) -> np.ndarray:
    """Drop the closing vertex and consecutive duplicates of a ring."""
    ring = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(ring) == 0:
        return ring
    keep = np.ones(len(ring), dtype=bool)
    keep[1:] = np.any(ring[1:] != ring[:-1], axis=1)
    ring = ring[keep]
    while len(ring) > 1 and np.all(ring[0] == ring[-1]):
        ring = ring[:-1]
    return ring


def _check_ring(ring: np.ndarray, name: str) -> np.ndarray:
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise GeometryError(f'{name} must be a list of (x, y) pairs')
    if len(ring) < 3:
        raise GeometryError(f'{name} has {len(ring)} vertices, at least 3 are required')
    if not np.all(np.isfinite(ring)):
        raise GeometryError(f'{name} has non-finite vertices')
    if np.any(np.all(ring == np.roll(ring, -1, axis=0), axis=1)):
        raise GeometryError(f'{name} has consecutive duplicate vertices')
    return ring


@dataclass(frozen=True, eq=False)
class Polygon2D:
    """Planar polygon in meters (world) or pixels (image).

    The ring is closed implicitly: the first vertex is not repeated at the end.

    :param exterior: (n, 2) array of vertices, n >= 3.
    :type exterior: numpy.ndarray
    :param holes: hole rings, each a (m, 2) array.
    :type holes: tuple[numpy.ndarray, ...]
    """
    exterior: np.ndarray
    holes: Tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ext = _check_ring(np.array(self.exterior, dtype=float), 'exterior ring')
        ext.flags.writeable = False
        holes = []
        for hole in self.holes:
            h = _check_ring(np.array(hole, dtype=float), 'hole ring')
            h.flags.writeable = False
            holes.append(h)
        object.__setattr__(self, 'exterior', ext)
        object.__setattr__(self, 'holes', tuple(holes))

    @classmethod
    def from_points(cls, points, holes: Iterable = ()) -> 'Polygon2D':
        """Build a polygon from a raw ring, removing a closing vertex and consecutive duplicates."""
        return cls(_clean_ring(points), tuple(_clean_ring(h) for h in holes))

    def __len__(self) -> int:
        return len(self.exterior)


@dataclass(frozen=True, eq=False)
class MultiPolygon2D:
    """Collection of polygons (with optional holes)."""
    polygons: Tuple[Polygon2D, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'polygons', tuple(self.polygons))

    def __iter__(self):
        return iter(self.polygons)

    def __len__(self) -> int:
        return len(self.polygons)

    @property
    def is_empty(self) -> bool:
        return len(self.polygons) == 0


AnyPolygon = Union[Polygon2D, MultiPolygon2D]


def _as_ring(poly) -> np.ndarray:
    if isinstance(poly, Polygon2D):
        return poly.exterior
    ring = _clean_ring(poly)
    if len(ring) < 3:
        raise GeometryError(f'polygon has {len(ring)} vertices, at least 3 are required')
    return ring


def _as_multipolygon(geom) -> MultiPolygon2D:
    if isinstance(geom, MultiPolygon2D):
        return geom
    if isinstance(geom, Polygon2D):
        return MultiPolygon2D((geom,))
    return MultiPolygon2D(tuple(geom))


def ring_signed_area(ring: np.ndarray) -> float:
    """Signed shoelace area of a ring (positive when counter-clockwise)."""
    # translated to the first vertex, mathematically identical and stable far from the origin
    d = ring - ring[0]
    x, y = d[:, 0], d[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_area(poly: Union[Polygon2D, Sequence]) -> float:
    """Return the area of a polygon (shoelace formula, holes subtracted).

    :param poly: polygon, or a raw sequence of at least 3 (x, y) vertices.
    :type poly: Polygon2D or array_like
    :return: area in squared units of the input.
    :rtype: float
    :raises GeometryError: if the polygon has fewer than 3 vertices.
    """
    area = abs(ring_signed_area(_as_ring(poly)))
    if isinstance(poly, Polygon2D):
        area -= sum(abs(ring_signed_area(h)) for h in poly.holes)
    return area


def multipolygon_area(mp: AnyPolygon) -> float:
    """Total area of a multipolygon."""
    return float(sum(polygon_area(p) for p in _as_multipolygon(mp)))


def convex_hull(points) -> Polygon2D:
    """Return the convex hull of a set of 2D points, counter-clockwise.

    :param points: (n, 2) array of points.
    :type points: array_like
    :return: hull polygon.
    :rtype: Polygon2D
    :raises GeometryError: fewer than 3 distinct points, or all points collinear.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(np.unique(pts, axis=0)) < 3:
        raise GeometryError('convex hull needs at least 3 distinct points')
    try:
        hull = ConvexHull(pts)
    except (QhullError, ValueError) as e:
        raise GeometryError(f'degenerate point set (collinear): {e}') from e
    ring = pts[hull.vertices]
    if abs(ring_signed_area(ring)) <= _EPS_AREA * max(1.0, float(np.ptp(pts)) ** 2):
        raise GeometryError('degenerate point set (collinear)')
    return Polygon2D(ring)


def min_area_rect(poly: Union[Polygon2D, Sequence]) -> Tuple[Polygon2D, float, float]:
    """Return the minimum-area rectangle enclosing a polygon (rotating calipers).

    One side of the optimal rectangle is collinear with an edge of the convex
    hull, so only the hull edge directions are evaluated.

    :param poly: polygon or raw vertices.
    :type poly: Polygon2D or array_like
    :return: rectangle, length of the long side, length of the short side.
    :rtype: tuple[Polygon2D, float, float]
    :raises GeometryError: if the input has zero area.
    """
    hull = convex_hull(_as_ring(poly)).exterior
    edges = np.roll(hull, -1, axis=0) - hull
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    edges = edges[lengths > 0]
    u = edges / np.hypot(edges[:, 0], edges[:, 1])[:, None]
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    proj_u = u @ hull.T
    proj_v = v @ hull.T
    min_u, max_u = proj_u.min(axis=1), proj_u.max(axis=1)
    min_v, max_v = proj_v.min(axis=1), proj_v.max(axis=1)
    areas = (max_u - min_u) * (max_v - min_v)
    k = int(np.argmin(areas))
    corners = np.array([
        min_u[k] * u[k] + min_v[k] * v[k],
        max_u[k] * u[k] + min_v[k] * v[k],
        max_u[k] * u[k] + max_v[k] * v[k],
        min_u[k] * u[k] + max_v[k] * v[k],
    ])
    side_a = float(max_u[k] - min_u[k])
    side_b = float(max_v[k] - min_v[k])
    if min(side_a, side_b) <= 0.0:
        raise GeometryError('degenerate polygon, zero-width enclosing rectangle')
    return Polygon2D(corners), max(side_a, side_b), min(side_a, side_b)


def to_shapely(geom: AnyPolygon) -> BaseGeometry:
    """Convert to a valid shapely geometry (invalid rings are repaired by :func:`shapely.make_valid`)."""
    parts = []
    for p in _as_multipolygon(geom):
        g = Polygon(p.exterior, [h for h in p.holes])
        if not g.is_valid:
            g = shapely.make_valid(g)
        parts.append(g)
    if not parts:
        return MultiPolygon()
    merged = shapely.union_all(parts) if len(parts) > 1 else parts[0]
    return _polygonal_part(merged)


def from_shapely(geom: BaseGeometry) -> MultiPolygon2D:
    """Convert a shapely geometry into a :class:`MultiPolygon2D`, dropping non-areal parts."""
    polygons = []
    for g in _iter_polygons(geom):
        ext = _clean_ring(g.exterior.coords)
        if len(ext) < 3 or abs(ring_signed_area(ext)) <= _EPS_AREA:
            continue
        holes = [_clean_ring(r.coords) for r in g.interiors]
        holes = [h for h in holes if len(h) >= 3 and abs(ring_signed_area(h)) > _EPS_AREA]
        polygons.append(Polygon2D(ext, tuple(holes)))
    return MultiPolygon2D(tuple(polygons))


def _iter_polygons(geom: BaseGeometry):
    if geom is None or geom.is_empty:
        return
    if geom.geom_type == 'Polygon':
        yield geom
    elif hasattr(geom, 'geoms'):
        for g in geom.geoms:
            yield from _iter_polygons(g)


def _polygonal_part(geom: BaseGeometry) -> BaseGeometry:
    polys = list(_iter_polygons(geom))
    if not polys:
        return MultiPolygon()
    if len(polys) == 1:
        return polys[0]
    return MultiPolygon(polys)


def union(polys: Iterable[AnyPolygon]) -> MultiPolygon2D:
    """Dissolve polygons into a single region (overlaps counted once)."""
    parts = [to_shapely(p) for p in polys]
    parts = [g for g in parts if not g.is_empty]
    if not parts:
        return MultiPolygon2D()
    return from_shapely(shapely.union_all(parts))


def intersection(a: AnyPolygon, b: AnyPolygon) -> MultiPolygon2D:
    """Boolean intersection of two regions."""
    ga, gb = to_shapely(a), to_shapely(b)
    if ga.is_empty or gb.is_empty:
        return MultiPolygon2D()
    return from_shapely(shapely.intersection(ga, gb))


def difference(a: AnyPolygon, b: AnyPolygon) -> MultiPolygon2D:
    """Boolean difference `a` minus `b`."""
    ga, gb = to_shapely(a), to_shapely(b)
    if ga.is_empty:
        return MultiPolygon2D()
    if gb.is_empty:
        return from_shapely(ga)
    return from_shapely(shapely.difference(ga, gb))


def intersection_area(a: AnyPolygon, b: AnyPolygon) -> float:
    """Return the area of the boolean intersection of two regions.

    :param a: first region.
    :type a: MultiPolygon2D or Polygon2D
    :param b: second region.
    :type b: MultiPolygon2D or Polygon2D
    :return: area in squared units, 0 for empty or degenerate inputs.
    :rtype: float
    """
    ga, gb = to_shapely(a), to_shapely(b)
    if ga.is_empty or gb.is_empty:
        return 0.0
    return float(shapely.intersection(ga, gb).area)


def distance_to_multipolygon(p, mp: AnyPolygon) -> float:
    """Distance from a point to a region, 0 inside."""
    g = to_shapely(mp)
    if g.is_empty:
        return float('inf')
    return float(shapely.distance(shapely.points(np.asarray(p, dtype=float)[:2]), g))


def _ring_parity_and_boundary(points: np.ndarray, ring: np.ndarray, tol: float):
    a = ring
    b = np.roll(ring, -1, axis=0)
    px, py = points[:, 0:1], points[:, 1:2]
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
    # crossing of a ray cast towards +x
    straddle = (ay > py) != (by > py)
    dy = np.where(by != ay, by - ay, 1.0)
    x_cross = ax + (py - ay) * (bx - ax) / dy
    inside = np.count_nonzero(straddle & (px < x_cross), axis=1) % 2 == 1
    # distance to each edge
    ex, ey = bx - ax, by - ay
    len2 = ex * ex + ey * ey
    t = ((px - ax) * ex + (py - ay) * ey) / np.where(len2 > 0, len2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    dx = px - (ax + t * ex)
    dyy = py - (ay + t * ey)
    on_boundary = np.any(dx * dx + dyy * dyy <= tol * tol, axis=1)
    return inside, on_boundary


def points_in_multipolygon(points, mp: AnyPolygon, tol: float = _BOUNDARY_TOL) -> np.ndarray:
    """Vectorized :func:`point_in_multipolygon` on an (n, 2) array of points.

    :param points: query points.
    :type points: array_like
    :param mp: region.
    :type mp: MultiPolygon2D or Polygon2D
    :param tol: distance under which a point is considered on the boundary.
    :type tol: float
    :return: boolean array, True for points inside or on the boundary.
    :rtype: numpy.ndarray
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    result = np.zeros(len(pts), dtype=bool)
    for poly in _as_multipolygon(mp):
        inside, boundary = _ring_parity_and_boundary(pts, poly.exterior, tol)
        for hole in poly.holes:
            in_hole, on_hole = _ring_parity_and_boundary(pts, hole, tol)
            inside &= ~in_hole
            boundary |= on_hole
        result |= inside | boundary
    return result


def point_in_multipolygon(p, mp: AnyPolygon) -> bool:
    """Return True if a point lies inside a region (ray casting, the boundary counts as inside).

    :param p: (x, y) point.
    :type p: array_like
    :param mp: region.
    :type mp: MultiPolygon2D or Polygon2D
    :rtype: bool
    """
    return bool(points_in_multipolygon(np.asarray(p, dtype=float)[:2], mp)[0])
