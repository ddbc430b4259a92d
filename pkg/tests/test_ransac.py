# -*- coding: utf-8 -*-
import math

import pytest

from lensedel.sfm.ransac import adaptive_trials, derive_seed


def test_adaptive_trials_bound():
    expected = math.log(1e-3) / math.log(1.0 - 0.5 ** 4)
    assert adaptive_trials(0.5, 4) == pytest.approx(expected)
    assert 100 < adaptive_trials(0.5, 4) < 110


def test_adaptive_trials_limits():
    assert adaptive_trials(0.0, 3) == math.inf
    assert adaptive_trials(1.0, 3) == 1.0
    assert adaptive_trials(0.9, 3) < adaptive_trials(0.3, 3)


def test_derive_seed_is_stable():
    assert derive_seed(7, 'IMG_0001') == derive_seed(7, 'IMG_0001')
    assert derive_seed(7, 'IMG_0001') != derive_seed(7, 'IMG_0002')
    assert derive_seed(7, 'IMG_0001') != derive_seed(8, 'IMG_0001')
    assert 0 <= derive_seed(0, '') < 2 ** 64
