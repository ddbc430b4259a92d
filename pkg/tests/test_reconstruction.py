# -*- coding: utf-8 -*-
import numpy as np
import pytest

from lensedel.errors import InvalidInputError, SchemaError
from lensedel.geocore.geodetic import GeoPoint
from lensedel.sfm.reconstruction import CameraModel, Observations, Reconstruction, Shot

ORIGIN = GeoPoint(30.45, -91.15, 0.0)
CAMERA = CameraModel(640, 480, 800.0, 320.0, 240.0)
NADIR = np.diag([1.0, -1.0, -1.0])


@pytest.mark.parametrize('args', [(0, 480, 800.0, 320.0, 240.0), (640, 480, -1.0, 320.0, 240.0),
                                  (640, 480, 800.0, 700.0, 240.0)])
def test_camera_model_validation(args):
    with pytest.raises(InvalidInputError):
        CameraModel(*args)


def test_camera_corners():
    assert CAMERA.corners().tolist() == [[0, 0], [640, 0], [640, 480], [0, 480]]


def test_project_nadir_shot():
    shot = Shot.from_matrix('a', NADIR, -NADIR @ np.array([0.0, 0.0, 100.0]), 'cam0')
    recon = Reconstruction(ORIGIN, {'cam0': CAMERA}, {'a': shot}, np.zeros((3, 3)))
    px = recon.project('a', [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
    assert np.allclose(px, [[320.0, 240.0], [400.0, 240.0]])
    assert np.allclose(recon.camera_centers(), [[0.0, 0.0, 100.0]])


def test_unknown_camera():
    shot = Shot('a', (1.0, 0.0, 0.0, 0.0), np.zeros(3), 'missing')
    with pytest.raises(SchemaError) as err:
        Reconstruction(ORIGIN, {'cam0': CAMERA}, {'a': shot}, np.zeros((3, 3)))
    assert err.value.field == 'shots.a.camera'


def test_too_few_points():
    with pytest.raises(SchemaError):
        Reconstruction(ORIGIN, {'cam0': CAMERA}, {}, np.zeros((2, 3)))


def test_observations_default_to_empty():
    shot = Shot('a', (1.0, 0.0, 0.0, 0.0), np.zeros(3), 'cam0')
    recon = Reconstruction(ORIGIN, {'cam0': CAMERA}, {'a': shot}, np.zeros((3, 3)),
                           {'a': Observations([[1.0, 2.0]], [0])})
    assert len(recon.observations_of('a')) == 1
    with pytest.raises(InvalidInputError):
        Observations([[1.0, 2.0]], [0, 1])
