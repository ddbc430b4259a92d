# -*- coding: utf-8 -*-
import numpy as np
import pytest

from lensedel.errors import InvalidInputError
from lensedel.geocore.geodetic import (WGS84_A, WGS84_E2, EnuPoint, GeoPoint, enu_origin, enu_to_geodetic,
                                       enu_to_geodetic_array, geodetic_to_enu, geodetic_to_enu_array)

BATON_ROUGE = GeoPoint(30.45, -91.15, 0.0)


def meridian_radius(lat_deg: float) -> float:
    s2 = np.sin(np.radians(lat_deg)) ** 2
    return WGS84_A * (1.0 - WGS84_E2) / (1.0 - WGS84_E2 * s2) ** 1.5


def test_small_latitude_step_is_north():
    enu = geodetic_to_enu(GeoPoint(30.45 + 1e-5, -91.15, 0.0), BATON_ROUGE)
    expected = meridian_radius(30.45) * np.radians(1e-5)
    assert enu.n == pytest.approx(expected, rel=1e-4)
    assert abs(enu.e) < 1e-6
    assert abs(enu.u) < 1e-4


def test_small_latitude_step_inverse():
    back = enu_to_geodetic(EnuPoint(0.0, meridian_radius(30.45) * np.radians(1e-5), 0.0), BATON_ROUGE)
    assert back.lat == pytest.approx(30.45 + 1e-5, abs=1e-9)
    assert back.lon == pytest.approx(-91.15, abs=1e-9)


def test_origin_maps_to_zero():
    enu = geodetic_to_enu(BATON_ROUGE, BATON_ROUGE)
    assert np.allclose(enu.as_array(), 0.0, atol=1e-9)


def test_round_trip_within_100_km():
    rng = np.random.default_rng(3)
    e, n = rng.uniform(-1e5, 1e5, (2, 200))
    u = rng.uniform(-100.0, 500.0, 200)
    lat, lon, alt = enu_to_geodetic_array(e, n, u, BATON_ROUGE)
    e2, n2, u2 = geodetic_to_enu_array(lat, lon, alt, BATON_ROUGE)
    assert np.max(np.abs(np.array([e2 - e, n2 - n, u2 - u]))) < 1e-6


def test_geodetic_round_trip_degrees():
    p = GeoPoint(30.47, -91.12, 12.0)
    back = enu_to_geodetic(geodetic_to_enu(p, BATON_ROUGE), BATON_ROUGE)
    assert back.lat == pytest.approx(p.lat, abs=1e-9)
    assert back.lon == pytest.approx(p.lon, abs=1e-9)
    assert back.alt == pytest.approx(p.alt, abs=1e-6)


def test_large_offset_stays_finite():
    back = enu_to_geodetic(EnuPoint(1e7, 0.0, 0.0), BATON_ROUGE)
    enu = geodetic_to_enu(back, BATON_ROUGE)
    assert np.all(np.isfinite(enu.as_array()))
    assert enu.e == pytest.approx(1e7, abs=1e-3)


@pytest.mark.parametrize('lat, lon', [(91.0, 0.0), (-90.5, 0.0), (0.0, 181.0), (float('nan'), 0.0)])
def test_invalid_geopoint(lat, lon):
    with pytest.raises(InvalidInputError):
        GeoPoint(lat, lon, 0.0)


def test_non_finite_enu():
    with pytest.raises(InvalidInputError):
        EnuPoint(float('inf'), 0.0)


def test_enu_origin_is_tag_centroid():
    tags = [GeoPoint(30.45, -91.15, 100.0), GeoPoint(30.46, -91.15, 200.0),
            GeoPoint(30.45, -91.14, 300.0), GeoPoint(30.46, -91.14, 400.0)]
    origin = enu_origin(tags)
    enu = np.array([geodetic_to_enu(t, origin).as_array() for t in tags])
    # tags at different heights lean with the tangent plane of the first one
    assert np.allclose(enu[:, :2].mean(axis=0), 0.0, atol=0.1)
    assert origin.alt == pytest.approx(250.0)


def test_enu_origin_needs_tags():
    with pytest.raises(InvalidInputError):
        enu_origin([])
