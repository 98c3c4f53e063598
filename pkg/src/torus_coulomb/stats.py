"""Batch means 표준오차."""

import math
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

DEFAULT_BATCHES = 32
MIN_BATCHES = 16


def batch_count(samples: int, batches: int = DEFAULT_BATCHES) -> int:
    """표본 수에 맞춘 batch 개수. MIN_BATCHES 개를 채우지 못하면 ConfigurationError."""
    if batches < MIN_BATCHES:
        raise ConfigurationError(f"batch 개수는 {MIN_BATCHES} 이상이어야 합니다 (입력: {batches}).")
    count = min(batches, samples)
    if count < MIN_BATCHES:
        raise ConfigurationError(
            f"측정 sweep {samples}회로는 batch {MIN_BATCHES}개를 만들 수 없습니다. --sweeps 를 늘려 주세요."
        )
    return count


def batch_means(samples, batches: int = DEFAULT_BATCHES) -> np.ndarray:
    """
    시계열을 길이가 같은 batch 로 나눠 각 batch 평균을 반환합니다.
    나머지 꼬리 표본(len % batch 길이)은 버립니다.
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    count = batch_count(samples.size, batches)
    size = samples.size // count
    return samples[: size * count].reshape(count, size).mean(axis=1)


def pooled_estimate(means: Sequence[np.ndarray]) -> tuple[float, float]:
    """
    여러 체인의 batch 평균을 하나로 모아 (평균, 표준오차) 를 계산합니다.
    표준오차는 batch 평균들의 표본 표준편차 / √(batch 수) 입니다.
    """
    pooled = np.concatenate([np.asarray(m, dtype=float).reshape(-1) for m in means])
    if pooled.size < 2:
        raise ConfigurationError("표준오차 계산에는 batch 가 두 개 이상 필요합니다.")
    return float(pooled.mean()), float(pooled.std(ddof=1) / math.sqrt(pooled.size))
