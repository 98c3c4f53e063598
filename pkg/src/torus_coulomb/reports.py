"""실행 보고서 기록 (JSON / CSV)."""

import csv
import io
import json
import logging
import sys
from typing import Any, Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ESTIMATE_COLUMNS = ("observable", "estimate", "stderr", "sweeps", "seed")


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def render_json(config: dict, results: Any) -> str:
    payload = {"schema_version": SCHEMA_VERSION, "config": config, "results": results}
    return json.dumps(_jsonable(payload), ensure_ascii=False, indent=2)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_jsonable(v) for v in row])
    return buffer.getvalue()


def estimate_rows(estimates) -> list[tuple]:
    """EstimateReport 들을 (observable, estimate, stderr, sweeps, seed) 행으로 바꿉니다."""
    return [(e.observable, e.estimate, e.stderr, e.sweeps, e.seed) for e in estimates]


def write_report(text: str, out: Optional[str]) -> None:
    """out 이 None 또는 '-' 이면 표준 출력, 아니면 파일에 씁니다."""
    if out in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(out, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info("보고서 저장: %s", out)
