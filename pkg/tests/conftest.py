# -*- coding: utf-8 -*-
"""Shared fixtures: synthetic scenes and their files."""
import numpy as np
import pytest

from lensedel.geocore.polygons import Polygon2D
from lensedel.pipeline.synth_scene import SceneParams, generate_scene, write_scene


def square(x0, y0, x1, y1) -> Polygon2D:
    return Polygon2D(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float))


def star_polygon(rng: np.random.Generator, n: int = 12, center=(0.0, 0.0), radius=(0.3, 1.0)) -> Polygon2D:
    """Random simple polygon: sorted angles, random radii."""
    angles = np.sort(rng.uniform(0.0, 2 * np.pi, n))
    while np.min(np.diff(np.append(angles, angles[0] + 2 * np.pi))) < 1e-3:
        angles = np.sort(rng.uniform(0.0, 2 * np.pi, n))
    r = rng.uniform(*radius, n)
    pts = np.column_stack([center[0] + r * np.cos(angles), center[1] + r * np.sin(angles)])
    return Polygon2D(pts)


@pytest.fixture(scope='session')
def scene():
    return generate_scene(SceneParams(), seed=0)


@pytest.fixture(scope='session')
def clean_scene():
    return generate_scene(SceneParams(outlier_fraction=0.0), seed=1)


@pytest.fixture(scope='session')
def horizon_scene():
    return generate_scene(SceneParams(horizon_camera=True), seed=2)


@pytest.fixture
def scene_dir(scene, tmp_path):
    config = write_scene(scene, tmp_path / 'scene')
    return config.parent


@pytest.fixture
def horizon_scene_dir(horizon_scene, tmp_path):
    config = write_scene(horizon_scene, tmp_path / 'horizon')
    return config.parent
