# -*- coding: utf-8 -*-
"""plotting file.

File containing the map of a flood estimate against the reference extent:
boundary outline, reference extent, and the estimate split into its true
positive and false positive regions.

.. module:: plotting
   :synopsis: maps of the flood estimates.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional

import matplotlib
matplotlib.use('Agg')
from matplotlib import pyplot as plt  # noqa: E402
from matplotlib.patches import PathPatch  # noqa: E402
from matplotlib.path import Path as MplPath  # noqa: E402

import numpy as np  # noqa: E402

from lensedel.flood.evaluation import overlap_regions  # noqa: E402
from lensedel.geocore.polygons import AnyPolygon, MultiPolygon2D, Polygon2D  # noqa: E402

logger = logging.getLogger(__name__)

COLORS = {
    'truth': '#4f81bd',
    'true_positive': '#2ca02c',
    'false_positive': '#d62728',
    'boundary': '#404040',
    'points': '#ff7f0e',
}


def _patch(poly: Polygon2D, **kwargs) -> PathPatch:
    rings = [poly.exterior] + list(poly.holes)
    vertices, codes = [], []
    for ring in rings:
        vertices.extend(ring.tolist() + [ring[0].tolist()])
        codes.extend([MplPath.MOVETO] + [MplPath.LINETO] * (len(ring) - 1) + [MplPath.CLOSEPOLY])
    return PathPatch(MplPath(np.array(vertices), codes), **kwargs)


def _draw(ax, region: AnyPolygon, label: Optional[str] = None, **kwargs) -> None:
    polys = [region] if isinstance(region, Polygon2D) else list(region)
    for i, poly in enumerate(polys):
        ax.add_patch(_patch(poly, label=label if i == 0 else None, **kwargs))


def plot_estimate(truth: AnyPolygon, boundary: AnyPolygon, estimate: Iterable[AnyPolygon], path,
                  points=None, title: str = '') -> Path:
    """Draw an estimate over the reference extent and save the figure.

    :param truth: reference flood extent, ENU meters.
    :type truth: MultiPolygon2D
    :param boundary: administrative boundary, ENU meters.
    :type boundary: MultiPolygon2D
    :param estimate: estimate polygons.
    :type estimate: Iterable[AnyPolygon]
    :param path: output image file (format from the extension).
    :type path: str or pathlib.Path
    :param points: GPS tags to draw, (n, 2) ENU meters.
    :type points: array_like, optional
    :param title: title of the map.
    :type title: str
    :return: path of the written figure.
    :rtype: pathlib.Path
    """
    tp, fp = overlap_regions(list(estimate), truth, boundary)
    fig, ax = plt.subplots(figsize=(7, 7))
    _draw(ax, boundary, 'boundary', fill=False, edgecolor=COLORS['boundary'], linestyle='--', lw=1.0)
    _draw(ax, truth, 'reference', facecolor=COLORS['truth'], alpha=0.35, edgecolor='none')
    _draw(ax, tp, 'true positive', facecolor=COLORS['true_positive'], alpha=0.6, edgecolor='none')
    _draw(ax, fp, 'false positive', facecolor=COLORS['false_positive'], alpha=0.6, edgecolor='none')
    if points is not None and len(points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        ax.scatter(pts[:, 0], pts[:, 1], s=12, c=COLORS['points'], label='GPS tags', zorder=3)
    ax.autoscale_view()
    ax.set_aspect('equal')
    ax.set_xlabel('east (m)')
    ax.set_ylabel('north (m)')
    if title:
        ax.set_title(title)
    ax.legend(loc='upper right', fontsize='small')
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    logger.info('map written to %s', path)
    return path


if __name__ == "__main__":
    square = Polygon2D(np.array([[0.0, 0.0], [100.0, 0.0], [100.0, 100.0], [0.0, 100.0]]))
    half = Polygon2D(np.array([[50.0, -20.0], [150.0, -20.0], [150.0, 80.0], [50.0, 80.0]]))
    area = Polygon2D(np.array([[-50.0, -50.0], [200.0, -50.0], [200.0, 200.0], [-50.0, 200.0]]))
    plot_estimate(MultiPolygon2D((square,)), MultiPolygon2D((area,)), [half], 'estimate_demo.png')
