"""torus_coulomb 전역 예외 계층."""


class TorusCoulombError(Exception):
    """패키지에서 발생하는 모든 예외의 기반 클래스"""


class InputDomainError(TorusCoulombError, ValueError):
    """잘못된 정점 인덱스, 인접하지 않은 정점 쌍, 범위 밖의 N/β 등"""


class PreconditionError(TorusCoulombError, ValueError):
    """연산의 사전 조건 위반 (예: x_i > x_j 가 아닌 배치)"""


class UnsupportedSizeError(TorusCoulombError, ValueError):
    """contour 이론이 성립하지 않는 격자 크기 (N < 4)"""


class DomainError(TorusCoulombError, ValueError):
    """스칼라 공식의 정의역 밖 (예: phi(beta) >= 1 인 m_beta)"""


class ConfigurationError(TorusCoulombError, ValueError):
    """실행 설정 오류 (batch 수 부족, 설정 파일 값 오류 등)"""


class UsageError(TorusCoulombError):
    """CLI 사용법 오류. 종료 코드 2로 보고됩니다."""


class BudgetExceededError(TorusCoulombError, RuntimeError):
    """열거 크기가 허용 예산을 넘는 경우"""

    def __init__(self, required: int, budget: int, what: str = "열거"):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            f"{what}에 {self.required:,}회의 평가가 필요하지만 예산은 {self.budget:,}회입니다. "
            "cutoff를 줄이거나 --budget-override 를 사용하세요."
        )
