import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from typing import Any, Callable, Iterable, Literal

from tqdm import tqdm

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(level: str | int = "INFO") -> logging.Logger:
    """
    torus_coulomb 로거에 stderr 핸들러 하나를 설치합니다. 여러 번 호출해도 핸들러는 하나입니다.

    Args:
        level: 로그 레벨 이름 또는 숫자.
    """
    root = logging.getLogger("torus_coulomb")
    if not any(getattr(h, "_torus_coulomb", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._torus_coulomb = True
        root.addHandler(handler)
    root.setLevel(level)
    return root


def resolve_workers(requested: int | None, cap: int | None = None) -> int:
    """요청된 작업자 수를 TORUS_COULOMB_THREADS 상한과 CPU 수로 자릅니다."""
    available = os.cpu_count() or 1
    workers = requested if requested and requested > 0 else 1
    if cap is not None and cap > 0:
        workers = min(workers, cap)
    return max(1, min(workers, available))


def run_in_pool(
    fn: Callable[..., Any],
    jobs: Iterable[tuple],
    workers: int = 1,
    kind: Literal["thread", "process"] = "thread",
    progress: str | None = None,
) -> list[Any]:
    """
    jobs 의 각 인자 튜플로 fn 을 실행하고 결과를 작업 순서대로 반환합니다.
    workers == 1 이면 현재 스레드에서 순서대로 실행합니다.

    Args:
        fn: 실행할 함수 (process 모드에서는 모듈 최상위 함수여야 함).
        jobs: fn 에 넘길 위치 인자 튜플들.
        workers: 작업자 수.
        kind: "thread" (numpy 위주 작업) 또는 "process" (Monte Carlo 체인).
        progress: 주어지면 완료된 작업 수를 이 이름의 tqdm 막대로 표시합니다.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*args) for args in jobs]
    executor_cls = ThreadPoolExecutor if kind == "thread" else ProcessPoolExecutor
    with executor_cls(max_workers=min(workers, len(jobs))) as pool:
        futures = {pool.submit(fn, *args): idx for idx, args in enumerate(jobs)}
        results: list[Any] = [None] * len(jobs)
        done = as_completed(futures)
        if progress:
            done = tqdm(done, total=len(jobs), desc=progress, leave=False)
        for future in done:
            results[futures[future]] = future.result()
        return results
