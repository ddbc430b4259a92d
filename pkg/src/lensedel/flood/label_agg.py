# -*- coding: utf-8 -*-
"""label_agg file.

File containing the aggregation of crowdsourced votes into binary image
labels. Each image was shown to `w` workers, `B` of them tagged it with the
class of interest.

Three schemes are available:

* ``A``: B > 1 (at least two workers),
* ``B``: B > 2,
* ``C``: B > 1 and B / w strictly above the median of B / w over all the images.

.. module:: label_agg
   :synopsis: binary labels from worker votes.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np

from lensedel.errors import InvalidInputError

logger = logging.getLogger(__name__)

SCHEMES = ('A', 'B', 'C')


@dataclass(frozen=True)
class VoteRecord:
    """Votes of an image.

    :param image_id: image identifier.
    :type image_id: str
    :param positive: number of workers tagging the image with the class (B).
    :type positive: int
    :param workers: number of workers who labelled the image (w).
    :type workers: int
    """
    image_id: str
    positive: int
    workers: int

    def __post_init__(self):
        if self.workers < 1:
            raise InvalidInputError(f'image {self.image_id}: at least one worker is required, got {self.workers}')
        if not 0 <= self.positive <= self.workers:
            raise InvalidInputError(f'image {self.image_id}: {self.positive} positive votes '
                                    f'out of {self.workers} workers')

    @property
    def ratio(self) -> float:
        return self.positive / self.workers


def get_min_votes(scheme: str) -> int:
    """Return the number of positive votes a scheme requires to be exceeded.

    :param scheme: aggregation scheme ('A', 'B' or 'C').
    :type scheme: str
    :return: B must be strictly greater than this value.
    :rtype: int
    """
    try:
        return {
            "A": 1,
            "B": 2,
            "C": 1,
        }[scheme]
    except KeyError:
        raise InvalidInputError(f'unknown label scheme {scheme!r}, expected one of {SCHEMES}') from None


def median_ratio(records: Iterable[VoteRecord]) -> float:
    """Median of B / w over the records (mean of the two central values for an even count)."""
    ratios = [r.ratio for r in records]
    if not ratios:
        raise InvalidInputError('median of an empty vote table')
    return float(np.median(ratios))


def aggregate(records: Iterable[VoteRecord], scheme: str = 'A') -> Dict[str, bool]:
    """Binary label of each image under a scheme.

    :param records: votes, one record per image.
    :type records: Iterable[VoteRecord]
    :param scheme: 'A', 'B' or 'C'.
    :type scheme: str
    :return: label of each image.
    :rtype: dict[str, bool]
    :raises InvalidInputError: unknown scheme, duplicate image, or empty input for scheme 'C'.
    """
    records = list(records)
    min_votes = get_min_votes(scheme)
    ids = [r.image_id for r in records]
    if len(set(ids)) != len(ids):
        raise InvalidInputError('an image appears twice in the vote table')
    labels = {r.image_id: r.positive > min_votes for r in records}
    if scheme == 'C':
        median = median_ratio(records)
        labels = {r.image_id: labels[r.image_id] and r.ratio > median for r in records}
    logger.info('scheme %s: %d/%d positive images', scheme, sum(labels.values()), len(labels))
    return labels
