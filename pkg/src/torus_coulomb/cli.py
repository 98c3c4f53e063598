"""
torus-coulomb 명령행 진입점.

    torus-coulomb greens --n 8
    torus-coulomb exact duality --n 2 --beta 1 --kx 6 --km 4
    torus-coulomb contours verify --n 4 --samples 1000 --beta 3
    torus-coulomb dg --n 8 --beta 3 --i 1,1 --j 2,1 --sweeps 100000 --format csv
    torus-coulomb verify --quick

종료 코드: 0 성공, 1 검증 실패 또는 예기치 않은 오류, 2 사용법/설정 오류.
"""

import argparse
import logging
import sys
import traceback
from typing import Optional, Sequence

from .app_config import load_config, read_config_file, resolve_run_config
from .app_controller import AppController
from .errors import (
    BudgetExceededError,
    ConfigurationError,
    DomainError,
    InputDomainError,
    TorusCoulombError,
    UnsupportedSizeError,
    UsageError,
)
from .reports import render_csv, render_json, write_report
from .utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

_FLAG_NAMES = (
    "n", "beta", "beta_star", "i", "j", "seed", "sweeps", "burn_in", "chains", "out", "format",
    "budget_override", "kx", "km", "max_len", "samples", "proposal", "k_max", "quick",
)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("공통 옵션")
    group.add_argument("--n", type=int, help="격자 한 변의 길이 N")
    group.add_argument("--beta", type=float, help="discrete Gaussian 역온도 β (β* 는 (4β)^-1 로 유도)")
    group.add_argument("--beta-star", type=float, help="Coulomb gas 역온도 β* (β 는 (4β*)^-1 로 유도)")
    group.add_argument("--i", help="정점 i 좌표 'x,y'")
    group.add_argument("--j", help="정점 j 좌표 'x,y'")
    group.add_argument("--seed", type=int, help="난수 seed (기본 0)")
    group.add_argument("--sweeps", type=int, help="측정 sweep 수")
    group.add_argument("--burn-in", type=int, help="버리는 sweep 수 (기본 max(sweeps/10, 1000))")
    group.add_argument("--chains", type=int, help="독립 체인 수")
    group.add_argument("--out", help="보고서 파일 경로 (기본: 표준 출력)")
    group.add_argument("--format", choices=("json", "csv"), help="보고서 형식")
    group.add_argument("--config", help="key=value 실행 설정 파일")
    group.add_argument("--budget-override", action="store_true", default=None, help="열거 예산 검사를 건너뜀")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="torus-coulomb",
        description="토러스 위 discrete Gaussian 모델과 쌍대 Coulomb gas 검증 도구",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("greens", parents=[common], help="Green 함수 g(d) 표")

    exact_parser = sub.add_parser("exact", help="절단 합 oracle")
    exact_sub = exact_parser.add_subparsers(dest="action", required=True)
    for name, help_text in (("duality", "쌍대성 등식 검사"), ("cross-identity", "교차 모멘트 항등식 검사")):
        p = exact_sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--kx", type=int, help="높이 cutoff K_x")
        p.add_argument("--km", type=int, help="전하 cutoff K_m")

    contours_parser = sub.add_parser("contours", help="Peierls contour 도구")
    contours_sub = contours_parser.add_subparsers(dest="action", required=True)
    contours_sub.add_parser("extract", parents=[common], help="무작위 배치에서 γ_ij 추출")
    p = contours_sub.add_parser("enumerate", parents=[common], help="분리 contour 전수 열거")
    p.add_argument("--max-len", type=int, help="최대 contour 길이")
    p = contours_sub.add_parser("verify", parents=[common], help="무작위 배치 위 contour 성질 검사")
    p.add_argument("--samples", type=int, help="표본 수 (기본 1000)")
    p.add_argument("--max-len", type=int, help="Peierls 합에 쓸 열거 길이 (선택)")

    p = sub.add_parser("dg", parents=[common], help="discrete Gaussian Monte Carlo")
    p.add_argument("--k-max", type=int, help="꼬리 확률 최대 k (기본 5)")

    p = sub.add_parser("cg", parents=[common], help="Coulomb gas dipole Monte Carlo")
    p.add_argument("--proposal", choices=("nn", "uniform"), help="dipole 제안 방식")

    p = sub.add_parser("verify", parents=[common], help="검증 모음 실행")
    p.add_argument("--quick", action="store_true", default=None, help="빠른 검사만 실행")
    return parser


def parse_and_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    명령행을 해석해 해당 연산을 실행하고 보고서를 씁니다.

    Returns:
        종료 코드 (0 성공, 1 검증 실패, 2 사용법 오류).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging("INFO")
    env_config = load_config()
    if env_config is None:
        print("설정 로드 실패. 실행을 종료합니다.", file=sys.stderr)
        return EXIT_FAILED
    setup_logging(env_config["log_level"])

    try:
        file_values = read_config_file(args.config) if args.config else {}
        flags = {name: getattr(args, name, None) for name in _FLAG_NAMES}
        cfg = resolve_run_config(args.command, flags, file_values, env_config, action=getattr(args, "action", None))
        outcome = AppController(env_config).run(cfg)
        if cfg.format == "json":
            text = render_json(cfg.to_dict(), outcome.results)
        else:
            text = render_csv(outcome.columns, outcome.rows)
        write_report(text, cfg.out)
    except (UsageError, ConfigurationError, InputDomainError, UnsupportedSizeError, DomainError, BudgetExceededError) as e:
        print(f"오류: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TorusCoulombError as e:
        print(f"오류: {e}", file=sys.stderr)
        return EXIT_FAILED
    except Exception as e:
        print(f"실행 중 예기치 않은 오류 발생: {e}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_FAILED

    if not outcome.passed:
        logger.error("검증 실패가 있습니다. 보고서를 확인하세요.")
        return EXIT_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))
