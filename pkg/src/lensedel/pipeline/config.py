# -*- coding: utf-8 -*-
"""config file.

File containing the configuration of a pipeline run, loaded from a JSON
document such as::

    {
        "paths": {"reconstruction": "reconstruction.json", "features": "features",
                  "weights": "weights.delt", "truth": "truth.geojson",
                  "boundary": "boundary.geojson", "metadata": "metadata.csv",
                  "out": "out"},
        "ransac": {"homography_inlier_dist": 5.0},
        "filters": {"max_area_km2": 5.0, "max_aspect_ratio": 4.0},
        "seed": 0
    }

Relative paths are resolved against the directory of the configuration file.
Missing sections and fields take their default values.

.. module:: config
   :synopsis: pipeline configuration.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from lensedel.errors import ConfigError
from lensedel.flood.footprint_filter import FilterConfig

logger = logging.getLogger(__name__)

_SEED_MIN = -(2 ** 63)
_SEED_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class PipelinePaths:
    """Input files of a run and output directory."""
    reconstruction: Path
    features: Path
    weights: Path
    truth: Path
    boundary: Path
    metadata: Path
    out: Path = Path('out')
    votes: Optional[Path] = None


@dataclass(frozen=True)
class RansacParams:
    """Parameters of the two RANSAC estimators."""
    plane_inlier_dist: float = 2.0
    plane_max_iters: int = 1000
    homography_inlier_dist: float = 5.0
    homography_max_iters: int = 2000
    confidence: float = 0.999
    min_inlier_ratio: float = 0.20

    def __post_init__(self):
        for name in ('plane_inlier_dist', 'homography_inlier_dist', 'min_inlier_ratio'):
            if not getattr(self, name) > 0:
                raise ConfigError(f'ransac.{name} must be positive, got {getattr(self, name)}')
        for name in ('plane_max_iters', 'homography_max_iters'):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f'ransac.{name} must be at least 1, got {getattr(self, name)}')
        if not 0 < self.confidence < 1:
            raise ConfigError(f'ransac.confidence must be in (0, 1), got {self.confidence}')
        if self.min_inlier_ratio > 1:
            raise ConfigError(f'ransac.min_inlier_ratio must be at most 1, got {self.min_inlier_ratio}')


@dataclass(frozen=True)
class CamParams:
    """Activation threshold and smallest region of the damage masks."""
    tau: float = 0.0
    min_pixels: int = 25

    def __post_init__(self):
        if int(self.min_pixels) < 0:
            raise ConfigError(f'cam.min_pixels must not be negative, got {self.min_pixels}')


@dataclass(frozen=True)
class SweepParams:
    """Threshold grid of the precision sweep."""
    ratios: Tuple[float, ...] = (2.0, 3.0, 4.0, 5.0)
    areas: Tuple[float, ...] = (1.0, 3.0, 5.0, 10.0)

    def __post_init__(self):
        object.__setattr__(self, 'ratios', tuple(float(r) for r in self.ratios))
        object.__setattr__(self, 'areas', tuple(float(a) for a in self.areas))
        if not self.ratios or not self.areas:
            raise ConfigError('sweep grid is empty')
        if min(self.ratios + self.areas) <= 0:
            raise ConfigError('sweep thresholds must be positive')


@dataclass(frozen=True)
class PipelineConfig:
    """
    Configuration of a pipeline run.

    :param paths: inputs and output directory.
    :type paths: PipelinePaths
    :param ransac: plane and homography estimation.
    :type ransac: RansacParams
    :param cam: damage mask extraction.
    :type cam: CamParams
    :param filters: footprint filters.
    :type filters: FilterConfig
    :param sweep: threshold grid of the precision sweep, None to skip it.
    :type sweep: SweepParams
    :param boundary_buffer_m: images tagged farther from the boundary are left out.
    :type boundary_buffer_m: float
    :param workers: size of the worker pool.
    :type workers: int
    :param seed: global seed, per-image seeds are derived from it.
    :type seed: int
    :param strict: a hard per-image failure makes the run fail.
    :type strict: bool
    """
    paths: PipelinePaths
    ransac: RansacParams = field(default_factory=RansacParams)
    cam: CamParams = field(default_factory=CamParams)
    filters: FilterConfig = field(default_factory=FilterConfig)
    sweep: Optional[SweepParams] = None
    boundary_buffer_m: float = 5000.0
    workers: int = 4
    seed: int = 0
    strict: bool = False

    def __post_init__(self):
        if not self.boundary_buffer_m >= 0:
            raise ConfigError(f'boundary_buffer_m must not be negative, got {self.boundary_buffer_m}')
        if int(self.workers) < 1:
            raise ConfigError(f'workers must be at least 1, got {self.workers}')
        if not isinstance(self.seed, int) or not _SEED_MIN <= self.seed <= _SEED_MAX:
            raise ConfigError(f'seed must be a 64-bit integer, got {self.seed!r}')

    def with_overrides(self, **changes) -> 'PipelineConfig':
        """Copy of the configuration with top-level fields or filter thresholds replaced.

        None values are ignored, so that unset command line options keep the file values.
        """
        changes = {k: v for k, v in changes.items() if v is not None}
        filters = {k: changes.pop(k) for k in ('max_area_km2', 'max_aspect_ratio') if k in changes}
        if filters:
            changes['filters'] = dataclasses.replace(self.filters, **filters)
        if 'out' in changes:
            changes['paths'] = dataclasses.replace(self.paths, out=Path(changes.pop('out')))
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as e:
            raise ConfigError(str(e)) from e


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f'section {name!r} must be an object')
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f'unknown field(s) in {name!r}: {sorted(unknown)}')
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f'section {name!r}: {e}') from e


def config_from_dict(data: dict, base_dir: Path = Path('.')) -> PipelineConfig:
    """Build a configuration from its JSON object.

    :param data: decoded configuration document.
    :type data: dict
    :param base_dir: directory against which relative paths are resolved.
    :type base_dir: pathlib.Path
    :return: validated configuration.
    :rtype: PipelineConfig
    :raises ConfigError: missing path, unknown field or invalid value.
    """
    if not isinstance(data, dict):
        raise ConfigError('configuration must be a JSON object')
    raw_paths = data.get('paths')
    if not isinstance(raw_paths, dict):
        raise ConfigError('configuration has no "paths" object')
    required = ('reconstruction', 'features', 'weights', 'truth', 'boundary', 'metadata')
    missing = [k for k in required if k not in raw_paths]
    if missing:
        raise ConfigError(f'missing path(s): {missing}')
    known = required + ('out', 'votes')
    unknown = set(raw_paths) - set(known)
    if unknown:
        raise ConfigError(f'unknown field(s) in "paths": {sorted(unknown)}')
    resolved = {k: (Path(base_dir) / v) for k, v in raw_paths.items() if v is not None}
    resolved.setdefault('out', Path(base_dir) / 'out')
    paths = PipelinePaths(**resolved)

    top = {'boundary_buffer_m', 'workers', 'seed', 'strict'}
    sections = {'paths', 'ransac', 'cam', 'filters', 'sweep'}
    unknown = set(data) - top - sections
    if unknown:
        raise ConfigError(f'unknown configuration field(s): {sorted(unknown)}')
    sweep = _section(SweepParams, data['sweep'], 'sweep') if data.get('sweep') is not None else None
    kwargs = {k: data[k] for k in top if k in data}
    try:
        return PipelineConfig(paths=paths,
                              ransac=_section(RansacParams, data.get('ransac'), 'ransac'),
                              cam=_section(CamParams, data.get('cam'), 'cam'),
                              filters=_section(FilterConfig, data.get('filters'), 'filters'),
                              sweep=sweep, **kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path) -> PipelineConfig:
    """Load a configuration file.

    :param path: JSON configuration file.
    :type path: str or pathlib.Path
    :return: validated configuration, paths resolved against the file directory.
    :rtype: PipelineConfig
    :raises ConfigError: unreadable file, invalid JSON or invalid configuration.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ConfigError(f'cannot read configuration {path}: {e}') from e
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path}, line {e.lineno}: invalid JSON ({e.msg})') from e
    config = config_from_dict(data, path.parent)
    logger.debug('configuration loaded from %s', path)
    return config


def config_to_dict(cfg: PipelineConfig) -> dict:
    """JSON-ready form of a configuration (paths as strings)."""
    def convert(value):
        if isinstance(value, Path):
            return str(value)
        if isinstance(value, dict):
            return {k: convert(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [convert(v) for v in value]
        return value
    return convert(dataclasses.asdict(cfg))
