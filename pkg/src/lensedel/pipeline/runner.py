# -*- coding: utf-8 -*-
"""runner file.

File containing :func:`run_pipeline`, the orchestration of a full run:

    study area -> alignment -> per-image georeferencing -> inlier gate
    -> footprint -> flood check -> CAM -> tracing -> projection
    -> footprint filters -> dissolve -> evaluation

The alignment runs once for the whole reconstruction, the per-image stages
run on a :class:`~lensedel.worker_pool.WorkerPool`. The outcome of
every image is recorded in the manifest with its disposition; a failing
image never stops the run.

.. module:: runner
   :synopsis: pipeline orchestration.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from lensedel.cam.cam_extent import ClassWeights, extract_damage_polygons, is_damaged
from lensedel.errors import (ConsensusError, EvaluationError, GeometryError, HorizonError,
                             LenseDelError, SchemaError, ShapeMismatchError, UpVectorAmbiguityError)
from lensedel.flood.evaluation import (FloodEstimate, LocalizedImage, PrecisionReport, SweepCell,
                                       area_precision, flood_coverage, gps_precision, overlap_regions,
                                       precision_sweep)
from lensedel.flood.footprint_filter import Footprint, image_footprint, passes_filters
from lensedel.geocore.geodetic import geodetic_to_enu
from lensedel.geocore.polygons import (MultiPolygon2D, Polygon2D, distance_to_multipolygon, intersection,
                                       multipolygon_area)
from lensedel.pipeline import pipeline_io
from lensedel.pipeline.config import PipelineConfig
from lensedel.sfm.homography import (estimate_ransac, ground_correspondences, project_polygon,
                                     retain_gate)
from lensedel.sfm.ransac import derive_seed
from lensedel.sfm.recon_align import AlignmentResult, align_reconstruction
from lensedel.sfm.reconstruction import Reconstruction
from lensedel.worker_pool import WorkerPool

logger = logging.getLogger(__name__)

DISPOSITIONS = ('out_of_area', 'not_reconstructed', 'georef_failed', 'gated_out', 'horizon',
                'degenerate_footprint', 'not_flood', 'filtered_out', 'localized', 'failed')
HARD_FAILURES = ('failed',)
M2_PER_KM2 = 1e6


@dataclass
class ImageRecord:
    """Outcome of the per-image stages."""
    image_id: str
    disposition: str = ''
    flood: Optional[bool] = None
    in_area: bool = False
    reconstructed: bool = False
    gated: bool = False
    inlier_ratio: Optional[float] = None
    inlier_count: Optional[int] = None
    rms_error: Optional[float] = None
    area_km2: Optional[float] = None
    aspect_ratio: Optional[float] = None
    cam_polygons: int = 0
    cam_polygons_dropped: int = 0
    error: Optional[str] = None
    gps_enu: Optional[Tuple[float, float]] = None
    footprint: Optional[Footprint] = None
    world_polygons: Tuple[Polygon2D, ...] = ()

    def as_dict(self) -> dict:
        return {
            'disposition': self.disposition, 'flood': self.flood, 'in_area': self.in_area,
            'reconstructed': self.reconstructed, 'gated': self.gated,
            'inlier_ratio': self.inlier_ratio, 'inlier_count': self.inlier_count, 'rms_error': self.rms_error,
            'area_km2': self.area_km2, 'aspect_ratio': self.aspect_ratio,
            'cam_polygons': self.cam_polygons, 'cam_polygons_dropped': self.cam_polygons_dropped,
            'error': self.error,
        }


@dataclass
class RunResult:
    """Estimates, reports and manifest of a run."""
    estimates: Dict[str, FloodEstimate]
    reports: Dict[str, Optional[PrecisionReport]]
    manifest: dict
    records: List[ImageRecord] = field(default_factory=list)
    sweep: Optional[List[List[SweepCell]]] = None

    @property
    def hard_failures(self) -> int:
        return sum(1 for r in self.records if r.disposition in HARD_FAILURES)


@dataclass(frozen=True, eq=False)
class _Context:
    """Immutable inputs shared by the per-image tasks."""
    cfg: PipelineConfig
    recon: Reconstruction
    aligned: Optional[Reconstruction]
    align_error: Optional[str]
    weights: ClassWeights
    boundary: MultiPolygon2D


def _classify(ctx: _Context, meta: pipeline_io.ImageMeta) -> bool:
    if meta.flood is not None:
        return meta.flood
    f = pipeline_io.load_tensor(ctx.cfg.paths.features / f'{meta.image_id}.delt')
    return is_damaged(f, ctx.weights)


def _localize(ctx: _Context, record: ImageRecord) -> None:
    """Georeferencing, footprint and CAM stages of a reconstructed image, filling `record`."""
    cfg = ctx.cfg
    image_id = record.image_id
    try:
        result = estimate_ransac(ground_correspondences(ctx.aligned, image_id),
                                 cfg.ransac.homography_inlier_dist, cfg.ransac.homography_max_iters,
                                 derive_seed(cfg.seed, image_id), image_id, cfg.ransac.confidence)
    except (GeometryError, ConsensusError) as e:
        record.disposition, record.error = 'georef_failed', str(e)
        return
    record.inlier_ratio, record.inlier_count, record.rms_error = \
        result.inlier_ratio, result.inlier_count, result.rms_error
    if not retain_gate(result, cfg.ransac.min_inlier_ratio):
        record.disposition = 'gated_out'
        return
    record.gated = True

    cam = ctx.aligned.camera_of(image_id)
    try:
        footprint = image_footprint(result.homography, cam, image_id)
    except HorizonError as e:
        record.disposition, record.error = 'horizon', str(e)
        return
    except GeometryError as e:
        record.disposition, record.error = 'degenerate_footprint', str(e)
        return
    record.footprint = footprint
    record.area_km2, record.aspect_ratio = footprint.area_km2, footprint.aspect_ratio
    if not record.flood:
        record.disposition = 'not_flood'
        return

    features = pipeline_io.load_tensor(cfg.paths.features / f'{image_id}.delt')
    regions = extract_damage_polygons(features, ctx.weights, cam.width, cam.height,
                                      cfg.cam.tau, cfg.cam.min_pixels)
    world = []
    for region in regions:
        try:
            projected = project_polygon(result.homography, region.polygon)
        except HorizonError:
            record.cam_polygons_dropped += 1
            continue
        world.extend(intersection(projected, footprint.polygon))
    record.world_polygons = tuple(world)
    record.cam_polygons = len(world)
    record.disposition = 'localized' if passes_filters(footprint, cfg.filters) else 'filtered_out'


def _process_image(ctx: _Context, meta: pipeline_io.ImageMeta) -> ImageRecord:
    record = ImageRecord(meta.image_id)
    gps = geodetic_to_enu(meta.gps, ctx.recon.origin)
    record.gps_enu = (gps.e, gps.n)
    if distance_to_multipolygon(record.gps_enu, ctx.boundary) > ctx.cfg.boundary_buffer_m:
        record.disposition = 'out_of_area'
        return record
    record.in_area = True
    try:
        record.flood = _classify(ctx, meta)
        if ctx.aligned is None or meta.image_id not in ctx.aligned.shots:
            record.disposition = 'not_reconstructed'
            record.error = ctx.align_error
            return record
        record.reconstructed = True
        _localize(ctx, record)
    except (SchemaError, ShapeMismatchError) as e:
        record.disposition, record.error = 'failed', str(e)
    except LenseDelError as e:
        record.disposition, record.error = 'failed', f'{type(e).__name__}: {e}'
    return record


def _funnel(records: List[ImageRecord]) -> Dict[str, int]:
    def count(predicate) -> int:
        return sum(1 for r in records if predicate(r))
    return {
        'total': len(records),
        'in_area': count(lambda r: r.in_area),
        'reconstructed': count(lambda r: r.reconstructed),
        'gated': count(lambda r: r.gated),
        'flood': count(lambda r: r.in_area and r.flood),
        'flood_and_gated': count(lambda r: r.gated and r.flood),
        'retained': count(lambda r: r.disposition == 'localized'),
        'estimated_not_localized': count(lambda r: r.in_area and r.flood and not r.reconstructed),
    }


def _estimates(records: List[ImageRecord]) -> Dict[str, FloodEstimate]:
    flood = [r for r in records if r.in_area and r.flood]
    localized = [r for r in records if r.disposition == 'localized']
    return {
        'gps': FloodEstimate('gps', points={r.image_id: r.gps_enu for r in flood}),
        'footprint': FloodEstimate('footprint', polygons={r.image_id: [r.footprint.polygon] for r in localized}),
        'cam': FloodEstimate('cam', polygons={r.image_id: list(r.world_polygons) for r in localized}),
    }


def _evaluate(estimates: Dict[str, FloodEstimate], truth, boundary) -> Tuple[dict, dict]:
    reports, skipped = {}, {}
    for method, estimate in estimates.items():
        try:
            if method == 'gps':
                pts = [estimate.points[k] for k in sorted(estimate.points)]
                reports[method] = gps_precision(pts, truth, boundary)
            else:
                reports[method] = area_precision(estimate.all_polygons(), truth, boundary, method,
                                                 len(estimate.polygons))
        except EvaluationError as e:
            reports[method] = None
            skipped[method] = str(e)
    return reports, skipped


def _write_outputs(cfg: PipelineConfig, result: RunResult, origin, height: float, truth, boundary) -> None:
    out = cfg.paths.out
    gps = result.estimates['gps']
    pipeline_io.write_geojson(out / 'estimate_gps.geojson',
                              [(gps.points[k], {'image_id': k, 'method': 'gps'}) for k in sorted(gps.points)],
                              origin, height)
    for method in ('footprint', 'cam'):
        estimate = result.estimates[method]
        features = []
        for image_id in sorted(estimate.polygons):
            polys = MultiPolygon2D(tuple(p for p in estimate.polygons[image_id]))
            if polys.is_empty:
                continue
            features.append((polys, {'image_id': image_id, 'method': method,
                                     'area_km2': multipolygon_area(polys) / M2_PER_KM2}))
        pipeline_io.write_geojson(out / f'estimate_{method}.geojson', features, origin, height)
        tp, fp = overlap_regions(estimate.all_polygons(), truth, boundary)
        pipeline_io.write_geojson(out / f'overlap_{method}.geojson', [
            (region, {'method': method, 'region': name, 'area_km2': multipolygon_area(region) / M2_PER_KM2})
            for name, region in (('true_positive', tp), ('false_positive', fp)) if not region.is_empty],
            origin, height)
    pipeline_io.write_json(out / 'reports.json',
                           {m: (r.as_dict() if r is not None else None) for m, r in result.reports.items()})
    pipeline_io.write_json(out / 'manifest.json', result.manifest)
    if result.sweep is not None:
        pipeline_io.write_json(out / 'sweep.json', [
            {'max_aspect_ratio': c.max_aspect_ratio, 'max_area_km2': c.max_area_km2, 'retained': c.retained,
             'footprint': c.footprint.as_dict() if c.footprint else None,
             'cam': c.cam.as_dict() if c.cam else None}
            for row in result.sweep for c in row])


def _coverage(truth, boundary) -> Optional[dict]:
    try:
        flooded_km2, fraction = flood_coverage(truth, boundary)
    except EvaluationError as e:
        logger.warning('flood coverage: %s', e)
        return None
    return {'flooded_km2': flooded_km2, 'boundary_fraction': fraction}


def align_stage(cfg: PipelineConfig, recon: Reconstruction) -> Tuple[Optional[AlignmentResult], Optional[str]]:
    """Align the reconstruction, returning the failure text instead of raising."""
    try:
        return align_reconstruction(recon, cfg.ransac.plane_inlier_dist, cfg.ransac.plane_max_iters,
                                    derive_seed(cfg.seed, 'align')), None
    except (GeometryError, UpVectorAmbiguityError) as e:
        logger.warning('alignment failed: %s', e)
        return None, f'alignment failed: {e}'


def run_pipeline(cfg: PipelineConfig, write: bool = True) -> RunResult:
    """Run the whole pipeline on the inputs of a configuration.

    :param cfg: run configuration.
    :type cfg: PipelineConfig
    :param write: write the GeoJSON estimates, reports and manifest to ``cfg.paths.out``.
    :type write: bool
    :return: estimates, precision reports and manifest.
    :rtype: RunResult
    :raises SchemaError: a shared input (reconstruction, weights, regions, metadata) is malformed.
    """
    recon = pipeline_io.load_reconstruction(cfg.paths.reconstruction)
    weights = pipeline_io.load_weights(cfg.paths.weights)
    metadata = pipeline_io.load_metadata(cfg.paths.metadata)

    alignment, align_error = align_stage(cfg, recon)
    height = alignment.ground_height if alignment is not None else 0.0
    truth = pipeline_io.read_geojson(cfg.paths.truth, recon.origin, height)
    boundary = pipeline_io.read_geojson(cfg.paths.boundary, recon.origin, height)
    ctx = _Context(cfg, recon, alignment.reconstruction if alignment else None, align_error, weights, boundary)

    unknown = sorted(set(recon.shots) - set(metadata))
    if unknown:
        logger.info('%d reconstructed shots have no metadata and are ignored', len(unknown))
    ids = sorted(metadata)
    outcomes = WorkerPool(cfg.workers).run(lambda meta: _process_image(ctx, meta),
                                           [(k, metadata[k]) for k in ids])
    records = []
    for outcome in outcomes:
        if outcome.ok:
            records.append(outcome.value)
        else:
            records.append(ImageRecord(outcome.key, 'failed',
                                       error=f'{type(outcome.error).__name__}: {outcome.error}'))
    for r in records:
        if r.disposition == 'failed' or (r.error and r.disposition not in ('horizon', 'not_reconstructed')):
            logger.warning('image %s: %s (%s)', r.image_id, r.disposition, r.error)

    funnel = _funnel(records)
    logger.info('funnel: %s', ', '.join(f'{k}={v}' for k, v in funnel.items()))
    estimates = _estimates(records)
    reports, skipped = _evaluate(estimates, truth, boundary)
    sweep = None
    if cfg.sweep is not None:
        localized = [LocalizedImage(r.image_id, r.footprint, r.world_polygons)
                     for r in records if r.disposition in ('localized', 'filtered_out')]
        sweep = precision_sweep(localized, cfg.sweep.ratios, cfg.sweep.areas, truth, boundary, cfg.workers)

    manifest = {
        'images': {r.image_id: r.as_dict() for r in records},
        'funnel': funnel,
        'dispositions': {d: sum(1 for r in records if r.disposition == d) for d in DISPOSITIONS},
        'alignment': None if alignment is None else {
            'ground_height': alignment.ground_height,
            'plane_inliers': int(len(alignment.inliers)),
            'up_vector': alignment.up_vector.tolist(),
        },
        'alignment_error': align_error,
        'reports': {m: (r.as_dict() if r is not None else None) for m, r in reports.items()},
        'skipped_reports': skipped,
        'flood_coverage': _coverage(truth, boundary),
        'seed': cfg.seed,
        'filters': {'max_area_km2': cfg.filters.max_area_km2, 'max_aspect_ratio': cfg.filters.max_aspect_ratio},
    }
    result = RunResult(estimates, reports, manifest, records, sweep)
    if write:
        _write_outputs(cfg, result, recon.origin, height, truth, boundary)
        logger.info('outputs written to %s', cfg.paths.out)
    return result


def localized_image_ids(result: RunResult) -> List[str]:
    """Identifiers of the images contributing to the area estimates."""
    return [r.image_id for r in result.records if r.disposition == 'localized']


def estimate_union(result: RunResult, method: str) -> MultiPolygon2D:
    """Dissolved area estimate of a method."""
    return result.estimates[method].dissolved()


def iou(a, b) -> float:
    """Intersection over union of two regions."""
    inter = multipolygon_area(intersection(a, b))
    union_area = multipolygon_area(a) + multipolygon_area(b) - inter
    return inter / union_area if union_area > 0 else float(np.nan)
