# -*- coding: utf-8 -*-
"""cli file.

File containing the ``lensedel`` command line tool. Each stage of the
pipeline can run on its own, on the intermediate files of the previous
stage, and ``lensedel run`` chains all of them from a configuration file.

Exit codes: 0 on success, 1 on a configuration or input error, 2 when
``--strict`` is set and at least one image hit a hard failure.

The log level is read from the ``LENSEDEL_LOG_LEVEL`` environment variable
(default WARNING) and can be overridden with ``--log-level``.

.. module:: cli
   :synopsis: command line interface.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import functools
import json
import logging
from pathlib import Path

import click

from lensedel import __version__
from lensedel.cam.cam_extent import compute_cam, extract_damage_polygons, is_damaged, threshold_mask, upsample
from lensedel.errors import LenseDelError
from lensedel.flood.evaluation import LocalizedImage, area_precision, gps_precision, precision_sweep
from lensedel.flood.footprint_filter import FilterConfig, Footprint, image_footprint, passes_filters
from lensedel.flood.label_agg import SCHEMES, aggregate
from lensedel.geocore.polygons import MultiPolygon2D, intersection, multipolygon_area, union
from lensedel.pipeline import pipeline_io
from lensedel.pipeline.config import load_config
from lensedel.pipeline.plotting import plot_estimate
from lensedel.pipeline.runner import run_pipeline
from lensedel.pipeline.synth_scene import SceneParams, generate_scene, write_scene
from lensedel.sfm.homography import estimate_ransac, ground_correspondences, project_polygon, retain_gate
from lensedel.sfm.ransac import derive_seed
from lensedel.sfm.recon_align import align_reconstruction

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 1
EXIT_HARD_FAILURE = 2
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def _handle_errors(command):
    """Turn the package errors into a message and exit code 1."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except LenseDelError as e:
            click.echo(f'error: {e}', err=True)
            raise SystemExit(EXIT_INPUT_ERROR) from e
    return wrapper


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return tuple(float(v) for v in value.split(',') if v.strip())
    except ValueError:
        raise click.BadParameter('comma-separated numbers expected') from None


@click.group()
@click.version_option(__version__)
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False),
              envvar='LENSEDEL_LOG_LEVEL', default='WARNING', show_default=True,
              help='Logging level (also read from LENSEDEL_LOG_LEVEL).')
def cli(log_level):
    """Damage localization from sparse oblique aerial images."""
    logging.basicConfig(level=getattr(logging, log_level.upper()),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


@cli.command()
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--inlier-dist', default=2.0, show_default=True, help='Plane inlier distance (m).')
@click.option('--max-iters', default=1000, show_default=True, help='Plane RANSAC samples.')
@click.option('--seed', default=0, show_default=True, help='Global seed.')
@_handle_errors
def align(reconstruction, out, inlier_dist, max_iters, seed):
    """Rotate RECONSTRUCTION so that the ground normal points to +z, write it to OUT."""
    recon = pipeline_io.load_reconstruction(reconstruction)
    result = align_reconstruction(recon, inlier_dist, max_iters, derive_seed(seed, 'align'))
    pipeline_io.save_reconstruction(result.reconstruction, out)
    click.echo(json.dumps({'ground_height': result.ground_height, 'plane_inliers': int(len(result.inliers)),
                           'up_vector': result.up_vector.tolist()}, sort_keys=True))


@cli.command()
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--inlier-dist', default=5.0, show_default=True, help='Homography inlier distance (m).')
@click.option('--max-iters', default=2000, show_default=True, help='Homography RANSAC samples.')
@click.option('--min-inlier-ratio', default=0.2, show_default=True, help='Inlier gate.')
@click.option('--seed', default=0, show_default=True, help='Global seed.')
@_handle_errors
def georef(reconstruction, out, inlier_dist, max_iters, min_inlier_ratio, seed):
    """Estimate the homography of every shot of an aligned RECONSTRUCTION."""
    recon = pipeline_io.load_reconstruction(reconstruction)
    results, retained = {}, {}
    for image_id in sorted(recon.shots):
        try:
            r = estimate_ransac(ground_correspondences(recon, image_id), inlier_dist, max_iters,
                                derive_seed(seed, image_id), image_id)
        except LenseDelError as e:
            logger.warning('image %s: %s', image_id, e)
            continue
        results[image_id], retained[image_id] = r, retain_gate(r, min_inlier_ratio)
    pipeline_io.save_georef(results, retained, out)
    click.echo(f'{sum(retained.values())}/{len(recon.shots)} images georeferenced and retained')


@cli.command()
@click.argument('features', type=click.Path(exists=True, file_okay=False))
@click.argument('weights', type=click.Path(exists=True, dir_okay=False))
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--tau', default=0.0, show_default=True, help='Activation threshold.')
@click.option('--min-pixels', default=25, show_default=True, help='Smallest region (pixels).')
@click.option('--metadata', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Image metadata: only its images are traced, its flood column wins over the class score.')
@click.option('--masks', type=click.Path(file_okay=False), default=None, help='Directory of P2 masks.')
@_handle_errors
def cam(features, weights, reconstruction, out, tau, min_pixels, metadata, masks):
    """Trace the damage polygons of the damaged images of FEATURES, in pixels.

    Images classified as not damaged are left out of OUT.
    """
    w = pipeline_io.load_weights(weights)
    recon = pipeline_io.load_reconstruction(reconstruction)
    meta = pipeline_io.load_metadata(metadata) if metadata is not None else None
    polygons, not_damaged = {}, 0
    for path in sorted(Path(features).glob('*.delt')):
        image_id = path.stem
        if image_id not in recon.shots:
            logger.warning('feature map %s has no shot, skipped', path.name)
            continue
        if meta is not None and image_id not in meta:
            logger.info('feature map %s has no metadata, skipped', path.name)
            continue
        camera = recon.camera_of(image_id)
        f = pipeline_io.load_tensor(path)
        if masks is not None:
            mask = threshold_mask(upsample(compute_cam(f, w), camera.width, camera.height), tau)
            pipeline_io.write_pgm(mask, Path(masks) / f'{image_id}.pgm')
        flood = meta[image_id].flood if meta is not None else None
        if flood is None:
            flood = is_damaged(f, w)
        if not flood:
            not_damaged += 1
            continue
        polygons[image_id] = extract_damage_polygons(f, w, camera.width, camera.height, tau, min_pixels)
    pipeline_io.save_image_polygons(polygons, out)
    click.echo(f'{sum(len(v) for v in polygons.values())} regions in {len(polygons)} damaged images '
               f'({not_damaged} not damaged)')


@cli.command()
@click.argument('georef_file', metavar='GEOREF', type=click.Path(exists=True, dir_okay=False))
@click.argument('polygons', type=click.Path(exists=True, dir_okay=False))
@click.argument('footprints', type=click.Path(exists=True, dir_okay=False))
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--height', default=0.0, show_default=True, help='ENU height of the ground plane (m).')
@_handle_errors
def project(georef_file, polygons, footprints, reconstruction, out, height):
    """Project the pixel POLYGONS onto the ground (GeoJSON).

    Only the images whose footprint was retained by `filter` (FOOTPRINTS) are
    projected.
    """
    homographies = pipeline_io.load_georef(georef_file)
    regions = pipeline_io.load_image_polygons(polygons)
    recon = pipeline_io.load_reconstruction(reconstruction)
    retained = {p.get('image_id') for _, p in pipeline_io.read_geojson_features(footprints, recon.origin, height)
                if p.get('retained', True)}
    features = []
    for image_id in sorted(regions):
        if image_id not in retained or image_id not in homographies or not homographies[image_id][1]:
            continue
        h = homographies[image_id][0].homography
        try:
            footprint = image_footprint(h, recon.camera_of(image_id), image_id).polygon
        except LenseDelError as e:
            logger.warning('image %s: %s', image_id, e)
            continue
        world = []
        for region in regions[image_id]:
            try:
                world.extend(intersection(project_polygon(h, region.polygon), footprint))
            except LenseDelError as e:
                logger.info('image %s: region dropped (%s)', image_id, e)
        if world:
            mp = MultiPolygon2D(tuple(world))
            features.append((mp, {'image_id': image_id, 'method': 'cam',
                                  'area_km2': multipolygon_area(mp) / 1e6}))
    pipeline_io.write_geojson(out, features, recon.origin, height)
    click.echo(f'{len(features)} images projected')


@cli.command(name='filter')
@click.argument('georef_file', metavar='GEOREF', type=click.Path(exists=True, dir_okay=False))
@click.argument('polygons', type=click.Path(exists=True, dir_okay=False))
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--max-area-km2', default=5.0, show_default=True, help='Largest footprint area.')
@click.option('--max-aspect-ratio', default=4.0, show_default=True, help='Largest footprint aspect ratio.')
@click.option('--height', default=0.0, show_default=True, help='ENU height of the ground plane (m).')
@_handle_errors
def filter_footprints(georef_file, polygons, reconstruction, out, max_area_km2, max_aspect_ratio, height):
    """Compute the footprints of the retained images and apply the area / aspect ratio filters.

    Only the damaged images, listed in POLYGONS (output of `cam`), are kept.
    Every footprint is written with its `retained` flag.
    """
    cfg = FilterConfig(max_area_km2, max_aspect_ratio)
    homographies = pipeline_io.load_georef(georef_file)
    damaged = pipeline_io.load_image_polygons(polygons)
    recon = pipeline_io.load_reconstruction(reconstruction)
    features = []
    for image_id, (result, gated) in sorted(homographies.items()):
        if not gated or image_id not in damaged or image_id not in recon.shots:
            continue
        try:
            fp = image_footprint(result.homography, recon.camera_of(image_id), image_id)
        except LenseDelError as e:
            logger.warning('image %s: %s', image_id, e)
            continue
        features.append((fp.polygon, {'image_id': image_id, 'method': 'footprint', 'area_km2': fp.area_km2,
                                      'aspect_ratio': fp.aspect_ratio, 'retained': passes_filters(fp, cfg)}))
    pipeline_io.write_geojson(out, features, recon.origin, height)
    click.echo(f'{sum(p["retained"] for _, p in features)}/{len(features)} footprints retained')


@cli.command()
@click.argument('estimate', type=click.Path(exists=True, dir_okay=False))
@click.argument('truth', type=click.Path(exists=True, dir_okay=False))
@click.argument('boundary', type=click.Path(exists=True, dir_okay=False))
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.option('--method', type=click.Choice(['gps', 'footprint', 'cam']), default='cam', show_default=True)
@click.option('--sweep', is_flag=True, help='Sweep the filter thresholds (ESTIMATE: output of `filter`).')
@click.option('--cam-estimate', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Projected CAM polygons (output of `project`) for --sweep.')
@click.option('--ratios', callback=_float_list, default='2,3,4,5', show_default=True)
@click.option('--areas', callback=_float_list, default='1,3,5,10', show_default=True)
@click.option('--height', default=0.0, show_default=True, help='ENU height of the ground plane (m).')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Write the report here.')
@_handle_errors
def evaluate(estimate, truth, boundary, reconstruction, method, sweep, cam_estimate, ratios, areas, height, out):
    """Precision of ESTIMATE against TRUTH inside BOUNDARY."""
    origin = pipeline_io.load_reconstruction(reconstruction).origin
    truth_mp = pipeline_io.read_geojson(truth, origin, height)
    boundary_mp = pipeline_io.read_geojson(boundary, origin, height)
    if sweep:
        if cam_estimate is None:
            raise click.UsageError('--sweep needs --cam-estimate')
        footprints = pipeline_io.read_geojson_features(estimate, origin, height)
        cams = {p.get('image_id'): mp for mp, p in pipeline_io.read_geojson_features(cam_estimate, origin, height)}
        images = []
        for mp, props in footprints:
            fp = Footprint(props['image_id'], mp.polygons[0], float(props['area_km2']),
                           float(props['aspect_ratio']))
            images.append(LocalizedImage(fp.image_id, fp, tuple(cams.get(fp.image_id, ()))))
        table = precision_sweep(images, ratios, areas, truth_mp, boundary_mp)
        payload = [{'max_aspect_ratio': c.max_aspect_ratio, 'max_area_km2': c.max_area_km2,
                    'retained': c.retained, 'footprint': c.footprint.as_dict() if c.footprint else None,
                    'cam': c.cam.as_dict() if c.cam else None} for row in table for c in row]
    elif method == 'gps':
        points = pipeline_io.read_geojson_points(estimate, origin, height)
        payload = gps_precision([points[k] for k in sorted(points)], truth_mp, boundary_mp).as_dict()
    else:
        polys = [mp for mp, p in pipeline_io.read_geojson_features(estimate, origin, height)
                 if p.get('retained', True)]
        payload = area_precision(polys, truth_mp, boundary_mp, method).as_dict()
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        pipeline_io.write_json(out, payload)
    click.echo(text)


@cli.command()
@click.argument('votes', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--scheme', type=click.Choice(SCHEMES), default='A', show_default=True)
@_handle_errors
def labels(votes, out, scheme):
    """Aggregate worker VOTES into binary image labels."""
    result = aggregate(pipeline_io.load_votes(votes), scheme)
    pipeline_io.write_labels(result, out)
    click.echo(f'{sum(result.values())}/{len(result)} positive images (scheme {scheme})')


@cli.command()
@click.argument('out', type=click.Path(file_okay=False))
@click.option('--seed', default=0, show_default=True)
@click.option('--cameras', default=12, show_default=True)
@click.option('--points', default=500, show_default=True)
@click.option('--outliers', default=0.2, show_default=True, help='Fraction of random matches.')
@click.option('--horizon/--no-horizon', default=False, show_default=True, help='Add a horizon camera.')
@_handle_errors
def synth(out, seed, cameras, points, outliers, horizon):
    """Generate a synthetic scene and its configuration in OUT."""
    scene = generate_scene(SceneParams(n_cameras=cameras, n_points=points, outlier_fraction=outliers,
                                       horizon_camera=horizon), seed)
    click.echo(str(write_scene(scene, out)))


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--seed', type=int, default=None, help='Override the global seed.')
@click.option('--workers', type=int, default=None, help='Override the worker count.')
@click.option('--strict/--no-strict', default=None, help='Exit with code 2 on a hard image failure.')
@click.option('--max-area-km2', type=float, default=None, help='Override the area filter.')
@click.option('--max-aspect-ratio', type=float, default=None, help='Override the aspect ratio filter.')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='Override the output directory.')
@_handle_errors
def run(config, seed, workers, strict, max_area_km2, max_aspect_ratio, out):
    """Run the whole pipeline from a CONFIG file."""
    cfg = load_config(config).with_overrides(seed=seed, workers=workers, strict=strict,
                                             max_area_km2=max_area_km2, max_aspect_ratio=max_aspect_ratio,
                                             out=out)
    result = run_pipeline(cfg)
    click.echo(json.dumps(result.manifest['funnel'], sort_keys=True))
    if cfg.strict and result.hard_failures:
        click.echo(f'{result.hard_failures} image(s) failed', err=True)
        raise SystemExit(EXIT_HARD_FAILURE)


@cli.command()
@click.argument('estimate', type=click.Path(exists=True, dir_okay=False))
@click.argument('truth', type=click.Path(exists=True, dir_okay=False))
@click.argument('boundary', type=click.Path(exists=True, dir_okay=False))
@click.argument('reconstruction', type=click.Path(exists=True, dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--title', default='', help='Title of the map.')
@click.option('--height', default=0.0, show_default=True, help='ENU height of the ground plane (m).')
@_handle_errors
def plot(estimate, truth, boundary, reconstruction, out, title, height):
    """Draw the ESTIMATE over TRUTH and BOUNDARY into the image OUT."""
    origin = pipeline_io.load_reconstruction(reconstruction).origin
    polys = [mp for mp, p in pipeline_io.read_geojson_features(estimate, origin, height)
             if p.get('retained', True)]
    truth_mp = pipeline_io.read_geojson(truth, origin, height)
    boundary_mp = pipeline_io.read_geojson(boundary, origin, height)
    plot_estimate(truth_mp, boundary_mp, [union(polys)] if polys else [], out, title=title)
    click.echo(out)


def main():
    cli(prog_name='lensedel')


if __name__ == "__main__":
    main()
