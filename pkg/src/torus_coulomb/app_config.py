import logging
import os
import traceback
from dataclasses import asdict, dataclass
from typing import Any, Optional

from dotenv import dotenv_values, load_dotenv

from .errors import ConfigurationError, UsageError
from .exact import DEFAULT_BUDGET
from .greens import dual_beta

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
OUTPUT_FORMATS = ("json", "csv")

# 설정 파일 키 → 변환 함수
_FIELD_TYPES = {
    "n": int,
    "beta": float,
    "beta_star": float,
    "i": str,
    "j": str,
    "seed": int,
    "sweeps": int,
    "burn_in": int,
    "chains": int,
    "out": str,
    "format": str,
    "budget_override": "bool",
    "kx": int,
    "km": int,
    "max_len": int,
    "samples": int,
    "proposal": str,
    "k_max": int,
    "quick": "bool",
}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


def load_config(env_file: Optional[str] = None) -> Optional[dict]:
    """
    .env 와 환경 변수에서 실행 환경 설정을 로드하고 검증합니다.

    잘못된 값은 경고를 남기고 기본값으로 대체합니다.

    Returns:
        dict: 'threads', 'budget', 'log_level' 키를 가진 딕셔너리. 예기치 않은 오류 시 None.
    """
    config = {}
    try:
        load_dotenv(env_file)

        # 작업자 수 상한
        threads = os.cpu_count() or 1
        threads_str = os.getenv("TORUS_COULOMB_THREADS")
        if threads_str:
            try:
                threads = int(threads_str)
                if threads < 1:
                    raise ValueError(threads_str)
            except ValueError:
                logger.warning(
                    "환경 변수 'TORUS_COULOMB_THREADS' 값 '%s'이(가) 유효하지 않습니다. CPU 수 %d 를 사용합니다.",
                    threads_str, os.cpu_count() or 1,
                )
                threads = os.cpu_count() or 1
        config["threads"] = threads

        # 정확 합 예산
        budget = DEFAULT_BUDGET
        budget_str = os.getenv("TORUS_COULOMB_BUDGET")
        if budget_str:
            try:
                budget = int(float(budget_str))
                if budget < 1:
                    raise ValueError(budget_str)
            except ValueError:
                logger.warning(
                    "환경 변수 'TORUS_COULOMB_BUDGET' 값 '%s'이(가) 유효하지 않습니다. 기본값 %d 를 사용합니다.",
                    budget_str, DEFAULT_BUDGET,
                )
                budget = DEFAULT_BUDGET
        config["budget"] = budget

        # 로그 레벨
        log_level = os.getenv("TORUS_COULOMB_LOG_LEVEL", "INFO").upper()
        if log_level not in LOG_LEVELS:
            logger.warning(
                "환경 변수 'TORUS_COULOMB_LOG_LEVEL' 값 '%s'이(가) 유효하지 않습니다. 'INFO' 를 사용합니다.",
                log_level,
            )
            log_level = "INFO"
        config["log_level"] = log_level

        return config

    except Exception as e:
        print(f"설정 중 예기치 않은 오류 발생: {e}")
        traceback.print_exc()
        return None


def read_config_file(path: str) -> dict[str, str]:
    """
    key=value 형식의 실행 설정 파일을 읽습니다. 키의 '-' 는 '_' 로 바꿉니다.

    Raises:
        ConfigurationError: 파일이 없거나 알 수 없는 키가 있을 때.
    """
    if not os.path.exists(path):
        raise ConfigurationError(f"설정 파일 '{path}'을 찾을 수 없습니다.")
    values = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lstrip("-").replace("-", "_").lower()
        if name not in _FIELD_TYPES:
            raise ConfigurationError(f"설정 파일 '{path}'의 키 '{key}'은(는) 알 수 없는 설정입니다.")
        values[name] = "" if value is None else value
    return values


def parse_vertex(value) -> Optional[tuple[int, int]]:
    """'x,y' 문자열 또는 (x, y) 를 좌표로 바꿉니다."""
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p for p in value.replace("(", "").replace(")", "").split(",") if p.strip()]
    else:
        parts = list(value)
    try:
        x, y = (int(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"정점은 'x,y' 형식이어야 합니다 (입력: {value!r}).")
    return (x, y)


def _convert(name: str, raw: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if not isinstance(raw, str):
        return raw
    try:
        if kind == "bool":
            lowered = raw.strip().lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(raw)
        return kind(raw.strip()) if kind is not str else raw.strip()
    except ValueError:
        raise ConfigurationError(f"설정 '{name}' 의 값 '{raw}'을(를) 해석할 수 없습니다.")


@dataclass
class RunConfig:
    """완전히 결정된 실행 설정. 모든 보고서에 그대로 들어갑니다."""

    subcommand: str
    action: Optional[str] = None
    n: Optional[int] = None
    beta: Optional[float] = None
    beta_star: Optional[float] = None
    i: Optional[tuple[int, int]] = None
    j: Optional[tuple[int, int]] = None
    kx: Optional[int] = None
    km: Optional[int] = None
    seed: int = 0
    sweeps: Optional[int] = None
    burn_in: Optional[int] = None
    chains: int = 1
    proposal: str = "nn"
    max_len: Optional[int] = None
    samples: Optional[int] = None
    k_max: int = 5
    quick: bool = False
    out: Optional[str] = None
    format: str = "json"
    budget: int = DEFAULT_BUDGET
    budget_override: bool = False
    threads: int = 1

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("i", "j"):
            if data[key] is not None:
                data[key] = list(data[key])
        return data


def resolve_run_config(
    subcommand: str,
    flags: dict,
    file_values: Optional[dict] = None,
    env_config: Optional[dict] = None,
    action: Optional[str] = None,
) -> RunConfig:
    """
    설정 파일 값 위에 명령행 플래그를 덮어써 RunConfig 를 만듭니다.

    β 와 β* 는 동시에 줄 수 없으며, 하나만 주어지면 β* = (4β)^{-1} 로 다른 쪽을 채웁니다.
    플래그로 온도를 주면 설정 파일의 온도 키는 무시합니다.

    Raises:
        UsageError: β 와 β* 를 함께 준 경우.
        ConfigurationError: 값을 해석할 수 없는 경우.
    """
    env_config = env_config or {}
    merged: dict[str, Any] = {}
    file_values = dict(file_values or {})
    if flags.get("beta") is not None or flags.get("beta_star") is not None:
        file_values.pop("beta", None)
        file_values.pop("beta_star", None)
    for name, raw in file_values.items():
        merged[name] = _convert(name, raw)
    for name, value in flags.items():
        if name in _FIELD_TYPES and value is not None:
            merged[name] = value

    beta, beta_star = merged.get("beta"), merged.get("beta_star")
    if beta is not None and beta_star is not None:
        raise UsageError("--beta 와 --beta-star 는 함께 쓸 수 없습니다. 둘 중 하나만 지정하세요.")
    if beta is not None:
        beta_star = dual_beta(beta)
    elif beta_star is not None:
        beta = dual_beta(beta_star)

    fmt = (merged.get("format") or "json").lower()
    if fmt not in OUTPUT_FORMATS:
        raise UsageError(f"--format 은 json 또는 csv 여야 합니다 (입력: {fmt}).")
    proposal = merged.get("proposal") or "nn"
    if proposal not in ("nn", "uniform"):
        raise UsageError(f"--proposal 은 nn 또는 uniform 이어야 합니다 (입력: {proposal}).")

    return RunConfig(
        subcommand=subcommand,
        action=action,
        n=merged.get("n"),
        beta=beta,
        beta_star=beta_star,
        i=parse_vertex(merged.get("i")),
        j=parse_vertex(merged.get("j")),
        kx=merged.get("kx"),
        km=merged.get("km"),
        seed=merged.get("seed", 0),
        sweeps=merged.get("sweeps"),
        burn_in=merged.get("burn_in"),
        chains=merged.get("chains", 1),
        proposal=proposal,
        max_len=merged.get("max_len"),
        samples=merged.get("samples"),
        k_max=merged.get("k_max", 5),
        quick=bool(merged.get("quick", False)),
        out=merged.get("out"),
        format=fmt,
        budget=env_config.get("budget", DEFAULT_BUDGET),
        budget_override=bool(merged.get("budget_override", False)),
        threads=env_config.get("threads", 1),
    )
