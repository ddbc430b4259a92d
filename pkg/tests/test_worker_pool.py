# -*- coding: utf-8 -*-
import threading
import time

import pytest

from lensedel.worker_pool import WorkerPool


def test_results_in_input_order():
    def slow_square(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    outcomes = WorkerPool(4).run(slow_square, [(str(i), i) for i in range(5)])
    assert [o.key for o in outcomes] == ['0', '1', '2', '3', '4']
    assert [o.value for o in outcomes] == [0, 1, 4, 9, 16]


def test_failure_does_not_stop_other_tasks():
    def task(x):
        if x == 2:
            raise ValueError('bad item')
        return x

    outcomes = WorkerPool(2).run(task, [(str(i), i) for i in range(4)])
    assert [o.ok for o in outcomes] == [True, True, False, True]
    assert isinstance(outcomes[2].error, ValueError)
    assert outcomes[2].value is None


def test_single_worker_runs_in_caller_thread():
    threads = WorkerPool(1).run(lambda _: threading.get_ident(), [('a', 0), ('b', 1)])
    assert {o.value for o in threads} == {threading.get_ident()}


def test_no_items():
    assert WorkerPool(3).run(lambda x: x, []) == []


def test_needs_a_worker():
    with pytest.raises(ValueError):
        WorkerPool(0)
