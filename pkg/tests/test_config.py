# -*- coding: utf-8 -*-
import json
from pathlib import Path

import pytest

from lensedel.errors import ConfigError
from lensedel.pipeline.config import (PipelineConfig, SweepParams, config_from_dict, config_to_dict,
                                      load_config)

PATHS = {'reconstruction': 'recon.json', 'features': 'features', 'weights': 'weights.delt',
         'truth': 'truth.geojson', 'boundary': 'boundary.geojson', 'metadata': 'metadata.csv'}


def write_config(tmp_path, data) -> Path:
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(data), encoding='utf-8')
    return path


def test_defaults(tmp_path):
    cfg = load_config(write_config(tmp_path, {'paths': PATHS}))
    assert cfg.ransac.homography_inlier_dist == 5.0
    assert cfg.ransac.min_inlier_ratio == 0.2
    assert cfg.ransac.plane_max_iters == 1000
    assert cfg.filters.max_area_km2 == 5.0
    assert cfg.filters.max_aspect_ratio == 4.0
    assert cfg.cam.tau == 0.0 and cfg.cam.min_pixels == 25
    assert cfg.boundary_buffer_m == 5000.0
    assert cfg.sweep is None and cfg.seed == 0 and not cfg.strict


def test_paths_relative_to_file(tmp_path):
    cfg = load_config(write_config(tmp_path, {'paths': PATHS}))
    assert cfg.paths.reconstruction == tmp_path / 'recon.json'
    assert cfg.paths.out == tmp_path / 'out'


def test_sections(tmp_path):
    data = {'paths': PATHS, 'ransac': {'homography_inlier_dist': 3.0}, 'filters': {'max_area_km2': 1.0},
            'sweep': {'ratios': [2, 3], 'areas': [1]}, 'workers': 2, 'seed': 42}
    cfg = load_config(write_config(tmp_path, data))
    assert cfg.ransac.homography_inlier_dist == 3.0
    assert cfg.filters.max_area_km2 == 1.0 and cfg.filters.max_aspect_ratio == 4.0
    assert cfg.sweep == SweepParams((2.0, 3.0), (1.0,))
    assert (cfg.workers, cfg.seed) == (2, 42)


@pytest.mark.parametrize('data', [
    {'paths': {k: v for k, v in PATHS.items() if k != 'truth'}},
    {'paths': PATHS, 'colour': 'blue'},
    {'paths': PATHS, 'ransac': {'iterations': 3}},
    {'paths': dict(PATHS, extra='x')},
    {'paths': PATHS, 'ransac': {'min_inlier_ratio': 1.5}},
    {'paths': PATHS, 'filters': {'max_area_km2': 0}},
    {'paths': PATHS, 'workers': 0},
    {'paths': PATHS, 'seed': 2 ** 64},
    {'paths': PATHS, 'sweep': {'ratios': []}},
    [],
])
def test_invalid_configs(tmp_path, data):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, data))


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{\n  "paths": {\n  ,\n}', encoding='utf-8')
    with pytest.raises(ConfigError, match='line 3'):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / 'nope.json')


def test_overrides(tmp_path):
    cfg = load_config(write_config(tmp_path, {'paths': PATHS}))
    changed = cfg.with_overrides(seed=7, workers=None, max_area_km2=2.5, out=tmp_path / 'other')
    assert changed.seed == 7 and changed.workers == cfg.workers
    assert changed.filters.max_area_km2 == 2.5 and changed.filters.max_aspect_ratio == 4.0
    assert changed.paths.out == tmp_path / 'other'
    assert cfg.seed == 0


def test_override_validated(tmp_path):
    cfg = load_config(write_config(tmp_path, {'paths': PATHS}))
    with pytest.raises(ConfigError):
        cfg.with_overrides(max_aspect_ratio=-1.0)
    with pytest.raises(ConfigError):
        cfg.with_overrides(colour='blue')


def test_to_dict_round_trip(tmp_path):
    cfg = config_from_dict({'paths': PATHS, 'seed': 3}, tmp_path)
    data = config_to_dict(cfg)
    assert data['seed'] == 3
    assert data['paths']['weights'] == str(tmp_path / 'weights.delt')
    json.dumps(data)
    assert isinstance(cfg, PipelineConfig)
