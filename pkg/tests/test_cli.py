# -*- coding: utf-8 -*-
import json

import pytest
from click.testing import CliRunner

from lensedel import __version__
from lensedel.cli import EXIT_HARD_FAILURE, EXIT_INPUT_ERROR, cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args, **kwargs):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False, **kwargs)


def test_version(runner):
    result = invoke(runner, '--version')
    assert result.exit_code == 0
    assert __version__ in result.output


def test_synth_then_run(runner, tmp_path):
    result = invoke(runner, 'synth', tmp_path / 'scene', '--seed', 3)
    assert result.exit_code == 0
    config = result.output.strip()
    assert config.endswith('config.json')
    result = invoke(runner, 'run', config, '--workers', 2)
    assert result.exit_code == 0
    funnel = json.loads(result.output.strip().splitlines()[-1])
    assert funnel['retained'] > 0
    assert (tmp_path / 'scene' / 'out' / 'manifest.json').is_file()


def test_run_overrides(runner, scene_dir, tmp_path):
    result = invoke(runner, 'run', scene_dir / 'config.json', '--max-area-km2', 1e-6, '--out', tmp_path / 'o')
    assert result.exit_code == 0
    assert json.loads(result.output.strip().splitlines()[-1])['retained'] == 0
    manifest = json.loads((tmp_path / 'o' / 'manifest.json').read_text())
    assert manifest['filters']['max_area_km2'] == 1e-6


def test_bad_config(runner, tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{"paths": {}}')
    result = invoke(runner, 'run', path)
    assert result.exit_code == EXIT_INPUT_ERROR
    assert 'error: missing path(s)' in result.output


def test_strict_run(runner, scene_dir):
    config = scene_dir / 'config.json'
    assert invoke(runner, 'run', config).exit_code == 0
    manifest = json.loads((scene_dir / 'out' / 'manifest.json').read_text())
    victim = next(k for k, r in sorted(manifest['images'].items()) if r['disposition'] == 'localized')
    (scene_dir / 'features' / f'{victim}.delt').write_bytes(b'DELT')
    assert invoke(runner, 'run', config).exit_code == 0
    result = invoke(runner, 'run', config, '--strict')
    assert result.exit_code == EXIT_HARD_FAILURE
    assert '1 image(s) failed' in result.output


def test_labels(runner, tmp_path):
    votes = tmp_path / 'votes.csv'
    votes.write_text('image_id,B,w\na,0,3\nb,3,3\nc,2,4\n')
    result = invoke(runner, 'labels', votes, tmp_path / 'labels.csv', '--scheme', 'B')
    assert result.exit_code == 0
    assert '1/3 positive images (scheme B)' in result.output
    assert (tmp_path / 'labels.csv').read_text() == 'image_id,label\na,0\nb,1\nc,0\n'


def test_labels_invalid_votes(runner, tmp_path):
    votes = tmp_path / 'votes.csv'
    votes.write_text('image_id,B,w\na,5,3\n')
    result = invoke(runner, 'labels', votes, tmp_path / 'labels.csv')
    assert result.exit_code == EXIT_INPUT_ERROR
    assert 'line 2' in result.output


def test_log_level_from_environment(runner, tmp_path):
    votes = tmp_path / 'votes.csv'
    votes.write_text('image_id,B,w\na,2,3\n')
    assert invoke(runner, 'labels', votes, tmp_path / 'l.csv', env={'LENSEDEL_LOG_LEVEL': 'debug'}).exit_code == 0
    result = runner.invoke(cli, ['labels', str(votes), str(tmp_path / 'l.csv')], env={'LENSEDEL_LOG_LEVEL': 'LOUD'})
    assert result.exit_code == 2


def test_gps_evaluation(runner, scene_dir):
    assert invoke(runner, 'run', scene_dir / 'config.json').exit_code == 0
    result = invoke(runner, 'evaluate', scene_dir / 'out' / 'estimate_gps.geojson', scene_dir / 'truth.geojson',
                    scene_dir / 'boundary.geojson', scene_dir / 'reconstruction.json', '--method', 'gps')
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report['method'] == 'gps' and report['precision'] == 0.0


def run_stages(runner, d, *filter_options, seed=0):
    """Chain align, georef, cam, filter and project on a scene directory, return the ground height."""
    result = invoke(runner, 'align', d / 'reconstruction.json', d / 'aligned.json', '--seed', seed)
    assert result.exit_code == 0
    height = json.loads(result.output)['ground_height']
    assert invoke(runner, 'georef', d / 'aligned.json', d / 'georef.json', '--seed', seed).exit_code == 0
    assert invoke(runner, 'cam', d / 'features', d / 'weights.delt', d / 'aligned.json', d / 'polygons.json',
                  '--metadata', d / 'metadata.csv', '--masks', d / 'masks').exit_code == 0
    assert invoke(runner, 'filter', d / 'georef.json', d / 'polygons.json', d / 'aligned.json',
                  d / 'footprints.geojson', '--height', height, *filter_options).exit_code == 0
    assert invoke(runner, 'project', d / 'georef.json', d / 'polygons.json', d / 'footprints.geojson',
                  d / 'aligned.json', d / 'cam.geojson', '--height', height).exit_code == 0
    return height


def evaluate_stage(runner, d, estimate, height, *options):
    return invoke(runner, 'evaluate', d / estimate, d / 'truth.geojson', d / 'boundary.geojson',
                  d / 'aligned.json', '--height', height, *options)


def test_stage_by_stage(runner, scene_dir):
    d = scene_dir
    height = run_stages(runner, d, seed=1)
    assert height == pytest.approx(5.0, abs=1e-3)
    georef = json.loads((d / 'georef.json').read_text())
    assert all(r['retained'] for r in georef.values())
    assert sorted(p.stem for p in (d / 'masks').glob('*.pgm')) == sorted(georef)

    result = evaluate_stage(runner, d, 'cam.geojson', height)
    assert result.exit_code == 0
    assert json.loads(result.output)['precision'] > 0.9

    result = evaluate_stage(runner, d, 'footprints.geojson', height, '--sweep', '--cam-estimate', d / 'cam.geojson',
                            '--ratios', '2,4', '--areas', '1,5', '--out', d / 'sweep.json')
    assert result.exit_code == 0
    cells = json.loads((d / 'sweep.json').read_text())
    assert [(c['max_aspect_ratio'], c['max_area_km2']) for c in cells] == [(2.0, 1.0), (2.0, 5.0),
                                                                           (4.0, 1.0), (4.0, 5.0)]

    assert invoke(runner, 'plot', d / 'cam.geojson', d / 'truth.geojson', d / 'boundary.geojson',
                  d / 'aligned.json', d / 'map.png', '--title', 'cam', '--height', height).exit_code == 0
    assert (d / 'map.png').read_bytes()[:4] == b'\x89PNG'


def test_stage_by_stage_matches_run(runner, scene_dir):
    d = scene_dir
    assert invoke(runner, 'run', d / 'config.json').exit_code == 0
    reports = json.loads((d / 'out' / 'reports.json').read_text())
    manifest = json.loads((d / 'out' / 'manifest.json').read_text())
    height = run_stages(runner, d)

    localized = sorted(k for k, r in manifest['images'].items() if r['disposition'] == 'localized')
    footprints = json.loads((d / 'footprints.geojson').read_text())['features']
    assert sorted(f['properties']['image_id'] for f in footprints if f['properties']['retained']) == localized
    for method, estimate in (('footprint', 'footprints.geojson'), ('cam', 'cam.geojson')):
        result = evaluate_stage(runner, d, estimate, height, '--method', method)
        assert result.exit_code == 0
        assert json.loads(result.output)['precision'] == pytest.approx(reports[method]['precision'], rel=1e-6)


def test_filtered_footprints_are_not_evaluated(runner, scene_dir):
    d = scene_dir
    height = run_stages(runner, d, '--max-area-km2', 1e-4)
    footprints = json.loads((d / 'footprints.geojson').read_text())['features']
    assert footprints and not any(f['properties']['retained'] for f in footprints)
    assert json.loads((d / 'cam.geojson').read_text())['features'] == []
    result = evaluate_stage(runner, d, 'footprints.geojson', height, '--method', 'footprint')
    assert result.exit_code == EXIT_INPUT_ERROR
    assert 'no area inside the boundary' in result.output


def test_cam_skips_images_that_are_not_damaged(runner, scene, scene_dir):
    d = scene_dir
    result = invoke(runner, 'cam', d / 'features', d / 'weights.delt', d / 'reconstruction.json',
                    d / 'polygons.json', '--metadata', d / 'metadata.csv')
    assert result.exit_code == 0
    damaged = sorted(m.image_id for m in scene.metadata if m.flood)
    assert sorted(json.loads((d / 'polygons.json').read_text())) == damaged
    assert f'({len(scene.metadata) - len(damaged)} not damaged)' in result.output


def test_missing_input(runner, tmp_path):
    result = runner.invoke(cli, ['align', str(tmp_path / 'nope.json'), str(tmp_path / 'out.json')])
    assert result.exit_code == 2
