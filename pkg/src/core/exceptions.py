"""
예외 계층
NashStream 전역에서 사용하는 오류 타입 정의
"""
from typing import List, Optional, Sequence


class NashStreamError(Exception):
    """모든 NashStream 오류의 기본 클래스"""


class StructuralError(NashStreamError, ValueError):
    """차원 불일치 또는 서로 다른 인스턴스 혼용"""


class PreconditionError(NashStreamError, ValueError):
    """입력 사전조건 위반 (음수 값, 정렬되지 않은 수열, λ < 1 등)"""


class UndefinedRatioError(NashStreamError, ValueError):
    """독점 효용 또는 최적 효용이 0인 에이전트가 있어 비율이 정의되지 않음"""

    def __init__(self, message: str, agents: Optional[Sequence[int]] = None):
        super().__init__(message)
        self.agents: List[int] = list(agents or [])


class InconsistencyError(NashStreamError, RuntimeError):
    """알고리즘 NW가 오프라인 최적값을 초과함 (벤치마크 솔버 실패)"""


class SolverNonconvergenceError(NashStreamError, RuntimeError):
    """Frank-Wolfe 반복 한도 도달"""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        # EGSolution (순환 import 회피를 위해 타입 생략)
        self.best = best


class RefusalError(NashStreamError, ValueError):
    """크기 제한 초과로 계산 거부 (오라클, 생성기 오버플로)"""


class InstanceFormatError(NashStreamError, ValueError):
    """인스턴스 파일 또는 설정 파일 형식 오류"""

    def __init__(self, message: str, errors: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.errors: List[str] = list(errors or [])


class AuditViolationError(NashStreamError, AssertionError):
    """불변식 감사 실패"""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"[{invariant}] {message}")
        self.invariant = invariant
