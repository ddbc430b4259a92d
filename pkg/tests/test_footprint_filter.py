# -*- coding: utf-8 -*-
import numpy as np
import pytest

from conftest import square
from lensedel.errors import ConfigError, HorizonError
from lensedel.flood.footprint_filter import (FilterConfig, Footprint, apply_filters, image_footprint,
                                             passes_filters)
from lensedel.geocore.polygons import Polygon2D, polygon_area
from lensedel.pipeline.synth_scene import ground_homography, look_rotation
from lensedel.sfm.homography import Homography
from lensedel.sfm.reconstruction import CameraModel, Shot


def footprint(image_id, area_km2, ratio) -> Footprint:
    return Footprint(image_id, square(0, 0, 1, 1), area_km2, ratio)


def test_identity_footprint():
    fp = image_footprint(Homography(np.eye(3)), CameraModel(100, 100, 100.0, 50.0, 50.0), 'a')
    assert fp.area_km2 == pytest.approx(1e-2)
    assert fp.aspect_ratio == pytest.approx(1.0)
    assert fp.image_id == 'a'


def test_oblique_footprint_matches_ray_casting():
    cam = CameraModel(640, 480, 800.0, 320.0, 240.0)
    center = np.array([0.0, 0.0, 300.0])
    r = look_rotation(0.0, 45.0)
    shot = Shot.from_matrix('a', r, -r @ center, 'cam0')
    fp = image_footprint(Homography(ground_homography(shot, cam, 0.0)), cam)
    corners = []
    for u, v in cam.corners():
        ray = r.T @ np.array([(u - cam.cx) / cam.focal, (v - cam.cy) / cam.focal, 1.0])
        corners.append((center + (-center[2] / ray[2]) * ray)[:2])
    expected = polygon_area(Polygon2D(np.array(corners)))
    assert fp.area_km2 * 1e6 == pytest.approx(expected, rel=1e-3)
    # trapezoid, wider far from the camera
    assert fp.aspect_ratio > 1.0


def test_footprint_beyond_horizon():
    cam = CameraModel(640, 480, 800.0, 320.0, 240.0)
    r = look_rotation(0.0, 5.0)
    shot = Shot.from_matrix('a', r, -r @ np.array([0.0, 0.0, 300.0]), 'cam0')
    with pytest.raises(HorizonError):
        image_footprint(Homography(ground_homography(shot, cam, 0.0)), cam)


def test_filters_strict_exceedance():
    cfg = FilterConfig(max_area_km2=5.0, max_aspect_ratio=4.0)
    assert passes_filters(footprint('a', 5.0, 4.0), cfg)
    assert not passes_filters(footprint('b', 5.0 + 1e-9, 1.0), cfg)
    assert not passes_filters(footprint('c', 1.0, 4.01), cfg)


def test_apply_filters_keeps_order():
    fps = [footprint('c', 1.0, 1.0), footprint('a', 10.0, 1.0), footprint('b', 0.5, 2.0)]
    assert [fp.image_id for fp in apply_filters(fps, FilterConfig())] == ['c', 'b']


def test_apply_filters_empty():
    assert apply_filters([], FilterConfig()) == []


@pytest.mark.parametrize('area, ratio', [(0.0, 4.0), (5.0, -1.0)])
def test_invalid_thresholds(area, ratio):
    with pytest.raises(ConfigError):
        FilterConfig(area, ratio)
