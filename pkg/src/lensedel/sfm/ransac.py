# -*- coding: utf-8 -*-
"""ransac file.

Helpers shared by the RANSAC estimators: adaptive trial count and
deterministic per-image seeds.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
import hashlib
import math


def adaptive_trials(inlier_ratio: float, sample_size: int, confidence: float = 0.999) -> float:
    """Return the number of trials after which an all-inlier sample was drawn with `confidence`.

    Standard bound k = log(1 - p) / log(1 - w^n).

    :param inlier_ratio: current best inlier ratio w.
    :type inlier_ratio: float
    :param sample_size: minimal sample size n.
    :type sample_size: int
    :param confidence: probability p.
    :type confidence: float
    :return: number of trials, infinite when no inlier was found yet.
    :rtype: float
    """
    if inlier_ratio <= 0.0:
        return math.inf
    good = inlier_ratio ** sample_size
    if good >= 1.0:
        return 1.0
    return math.log(1.0 - confidence) / math.log(1.0 - good)


def derive_seed(global_seed: int, key: str) -> int:
    """Derive a 64-bit seed from a global seed and a key (image id).

    The result does not depend on the Python hash randomization, so a batch
    gives the same per-image streams whatever the scheduling of the workers.
    """
    digest = hashlib.blake2b(f'{int(global_seed)}:{key}'.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')
