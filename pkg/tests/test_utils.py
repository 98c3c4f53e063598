import time

import pytest

from torus_coulomb import exact, utils
from torus_coulomb.exact import TruncationSpec


def _slow_square(k: int) -> int:
    time.sleep(0.01 * (5 - k))
    return k * k


class _RecordingBar:
    def __init__(self, iterable, total=None, desc=None, leave=True):
        self.iterable = iterable
        self.total = total
        self.desc = desc
        self.seen = 0
        _RecordingBar.instances.append(self)

    def __iter__(self):
        for item in self.iterable:
            self.seen += 1
            yield item


@pytest.fixture
def recording_bar(monkeypatch):
    _RecordingBar.instances = []
    monkeypatch.setattr(utils, "tqdm", _RecordingBar)
    return _RecordingBar


def test_pool_keeps_job_order():
    jobs = [(k,) for k in range(5)]
    assert utils.run_in_pool(_slow_square, jobs, workers=3) == [0, 1, 4, 9, 16]


def test_pool_reports_completed_jobs(recording_bar):
    jobs = [(k,) for k in range(5)]
    result = utils.run_in_pool(_slow_square, jobs, workers=3, progress="제곱")
    assert result == [0, 1, 4, 9, 16]
    (bar,) = recording_bar.instances
    assert bar.total == 5
    assert bar.seen == 5
    assert bar.desc == "제곱"


def test_sequential_pool_draws_no_bar(recording_bar):
    utils.run_in_pool(_slow_square, [(1,), (2,)], workers=1, progress="제곱")
    assert recording_bar.instances == []


def test_threaded_exact_sum_shows_progress(recording_bar):
    trunc = TruncationSpec(height_cutoff=3)
    one = exact.dg_partition(3, 1.0, trunc, workers=1)
    pooled = exact.dg_partition(3, 1.0, trunc, workers=2, progress=True)
    assert pooled == pytest.approx(one, rel=1e-12)
    (bar,) = recording_bar.instances
    assert bar.total > 2
    assert bar.seen == bar.total


def test_resolve_workers_respects_cap():
    assert utils.resolve_workers(None) == 1
    assert utils.resolve_workers(64, 2) <= 2
    assert utils.resolve_workers(0, 8) == 1
